"""Parameter sweeps over speed, user count, scheme and seed."""
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor

from .runner import run

log = logging.getLogger(__name__)

RUN_COLUMNS = ["scheme", "speed", "users", "seed", "std_dev", "eff_sum_rate",
               "sum_rate", "p_o"]


def sweep_grid(cfg, schemes=None, speeds=None, users=None, seeds=None):
    """Every run configuration of the Cartesian product, in a fixed order."""
    schemes = schemes or cfg.sweep_schemes
    speeds = speeds or cfg.sweep_speeds
    users = users or cfg.sweep_users
    seeds = seeds if seeds is not None else cfg.sweep_seeds
    return [cfg.replace(scheme=sc, speed=float(v), user_count=int(u), seed=int(sd))
            for sc, v, u, sd in itertools.product(schemes, speeds, users, seeds)]


def _one(cfg):
    res = run(cfg)
    row = {"scheme": cfg.scheme, "speed": cfg.speed, "users": cfg.user_count, "seed": cfg.seed}
    row.update(res.summary(cfg.burn_in_fraction))
    return row


def run_sweep(configs, workers=1):
    """Summary row per configuration, in input order whatever ``workers`` is."""
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            rows = list(ex.map(_one, configs))
    else:
        rows = []
        for i, c in enumerate(configs):
            rows.append(_one(c))
            log.info("sweep %d/%d done (%s v=%g U=%d seed=%d)", i + 1, len(configs),
                     c.scheme, c.speed, c.user_count, c.seed)
    return rows
