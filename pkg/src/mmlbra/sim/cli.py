"""Command-line entry point: ``mmlbra run`` and ``mmlbra sweep``."""
import argparse
import logging
import os
import sys
import time

from .. import _jit
from ..core import ConfigurationError
from ..schemes import SCHEMES
from . import output
from .config import PRESETS, RunConfig, dump_config, load_config, preset
from .runner import run
from .sweep import RUN_COLUMNS, run_sweep, sweep_grid

log = logging.getLogger("mmlbra")


def _csv(kind):
    def parse(text):
        try:
            return [kind(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad list {text!r}") from None
    return parse


def _scheme(name):
    if name not in SCHEMES:
        raise argparse.ArgumentTypeError(f"unknown scheme {name!r} (choose from {', '.join(SCHEMES)})")
    return name


def _common(p):
    p.add_argument("--config", help="YAML configuration file")
    p.add_argument("--preset", choices=sorted(PRESETS), help="start from a named preset")
    p.add_argument("--steps", type=int)
    p.add_argument("--out", help="output directory (default: ./out)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    ap = argparse.ArgumentParser(prog="mmlbra", description="O-RAN load-balancing simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate one scheme and seed")
    _common(r)
    r.add_argument("--scheme", type=_scheme)
    r.add_argument("--seed", type=int)
    r.add_argument("--speed", type=float)
    r.add_argument("--users", type=int)
    r.add_argument("--check", action="store_true", help="validate constraints every step")

    s = sub.add_parser("sweep", help="grid of schemes x speeds x user counts x seeds")
    _common(s)
    s.add_argument("--scheme", type=_csv(_scheme), help="comma-separated scheme ids")
    s.add_argument("--seed", type=_csv(int), help="comma-separated seeds")
    s.add_argument("--speed", type=_csv(float), help="comma-separated speeds, m/s")
    s.add_argument("--users", type=_csv(int), help="comma-separated user counts")
    s.add_argument("--workers", type=int, default=1)

    c = sub.add_parser("config", help="print a commented YAML configuration")
    c.add_argument("--preset", choices=sorted(PRESETS))
    return ap


def resolve_config(args):
    base = preset(args.preset) if args.preset else None
    if args.config:
        cfg = load_config(args.config, base)
    else:
        cfg = base or RunConfig()
    if args.steps is not None:
        cfg = cfg.replace(steps=args.steps)
    if args.command == "run":
        for flag, key in (("scheme", "scheme"), ("seed", "seed"), ("speed", "speed"),
                          ("users", "user_count")):
            v = getattr(args, flag)
            if v is not None:
                cfg = cfg.replace(**{key: v})
    out = args.out or cfg.out or "out"
    return cfg.replace(out=out).validate()


def cmd_run(args):
    cfg = resolve_config(args)
    out = output.ensure_dir(cfg.out)
    t0 = time.perf_counter()
    res = run(cfg, check=args.check)
    stem = f"{cfg.scheme}_seed{cfg.seed}"
    metrics = output.write_metrics(res, os.path.join(out, f"metrics_{stem}.csv"))
    output.write_state(res.state, os.path.join(out, f"state_{stem}.json"))
    dump_config(cfg, os.path.join(out, f"config_{stem}.yaml"))
    summ = res.summary(cfg.burn_in_fraction)
    log.info("%d steps in %.1fs (%s backend) -> %s", cfg.steps, time.perf_counter() - t0,
             _jit.backend_name(), metrics)
    print(f"scheme={cfg.scheme} seed={cfg.seed} std_dev={summ['std_dev']:.4f} "
          f"eff_sum_rate={summ['eff_sum_rate']:.6g} sum_rate={summ['sum_rate']:.6g} "
          f"p_o={summ['p_o']:.4f}", file=sys.stderr)
    if args.check and res.violations:
        print(f"{len(res.violations)} constraint violations", file=sys.stderr)
        return 1
    return 0


def cmd_sweep(args):
    cfg = resolve_config(args)
    out = output.ensure_dir(cfg.out)
    grid = sweep_grid(cfg, args.scheme, args.speed, args.users, args.seed)
    log.info("sweep of %d runs", len(grid))
    rows = run_sweep(grid, args.workers)
    output.write_table(rows, os.path.join(out, "runs.csv"), RUN_COLUMNS)
    agg = output.aggregate(rows)
    output.write_table(agg, os.path.join(out, "aggregate.csv"), output.AGGREGATE_COLUMNS)
    dump_config(cfg, os.path.join(out, "config.yaml"))
    print(output.format_table(agg, ["scheme", "speed", "users", "n_seeds", "std_dev_mean",
                                    "std_dev_se", "eff_sum_rate_mean", "eff_sum_rate_se"]),
          file=sys.stderr)
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s", stream=sys.stderr)
    try:
        if args.command == "config":
            sys.stdout.write(dump_config(preset(args.preset) if args.preset else RunConfig()))
            return 0
        return cmd_run(args) if args.command == "run" else cmd_sweep(args)
    except ConfigurationError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
