"""The per-step control loop."""
import logging
from dataclasses import dataclass, field

import numpy as np

from .. import channel, core, handover, load, mobility, schemes
from ..core import Allocation, build_hex_topology, initial_association, validate_constraints
from .config import RunConfig

log = logging.getLogger(__name__)


@dataclass
class RunResult:
    scheme: str
    seed: int
    utilization: np.ndarray
    std_dev: np.ndarray
    sum_rate: np.ndarray
    p_o: np.ndarray
    eff_sum_rate: np.ndarray
    objective: np.ndarray
    handovers: np.ndarray
    outage_now: np.ndarray
    params: np.ndarray
    violations: list = field(default_factory=list)
    max_power: np.ndarray = None
    state: dict = None

    def __len__(self):
        return len(self.std_dev)

    def window(self, fraction=0.5):
        """Slice covering the final ``1 - fraction`` of the steps."""
        return slice(int(len(self) * fraction), len(self))

    def summary(self, burn_in_fraction=0.5):
        w = self.window(burn_in_fraction)
        if len(self) == 0:
            return {"std_dev": float("nan"), "eff_sum_rate": float("nan"),
                    "sum_rate": float("nan"), "p_o": float("nan")}
        return {
            "std_dev": float(np.mean(self.std_dev[w])),
            "eff_sum_rate": float(np.mean(self.eff_sum_rate[w])),
            "sum_rate": float(np.mean(self.sum_rate[w])),
            "p_o": float(np.mean(self.p_o[w])),
        }


class Simulation:
    """All mutable state of one run, advanced with :meth:`step`."""

    def __init__(self, cfg: RunConfig, check=False):
        self.cfg = cfg.validate()
        self.check = check
        c = cfg
        self.topology = build_hex_topology(c.odu_count, c.oru_count, c.isd, c.h_bs, c.h_ut)
        self.radio = channel.RadioConfig(c.n0_dbm_hz, c.subchannel_bw, c.n_subchannels, c.fc_ghz)
        self.levels = schemes.PALevels(tuple(c.pa_thresholds), tuple(c.pa_levels))
        self.theta = schemes.handover_set(c.offsets, c.hystereses)
        S, N, U = c.oru_count, c.n_subchannels, c.user_count
        self.S, self.N, self.U = S, N, U

        root = np.random.SeedSequence(c.seed)
        streams = root.spawn(4 + 2 * S)
        self.rng_place, self.rng_move, self.rng_shadow, self.rng_fading = (
            np.random.default_rng(s) for s in streams[:4])
        lb_rngs = [np.random.default_rng(s) for s in streams[4:4 + S]]
        sa_rngs = [np.random.default_rng(s) for s in streams[4 + S:]]

        mcfg = mobility.MobilityConfig(U, c.hotspot_fraction, c.hotspot_oru, c.speed, c.dt,
                                       c.direction_hold, c.hotspot_confined, c.demand_bps,
                                       c.hotspot_region)
        self.users = mobility.init_positions(mcfg, self.topology, self.rng_place)
        self.home = mobility.hotspot_region(mcfg, self.topology)
        self.bounds = self.topology.bounds()
        self.hold_steps = max(1, int(round(c.direction_hold / c.dt)))
        self.shadow = (self.rng_shadow.normal(0.0, c.shadowing_std_db, (S, U))
                       if c.shadowing else None)
        self._refresh_channel()

        self.association = initial_association(self.rsrp) if U else core.Association(
            np.zeros(0, dtype=np.int64))
        self.timers = handover.A3TimerState(U, S, c.ttt, c.dt)
        self.allocation = Allocation.empty(S, N)
        self.utilization = np.zeros(S, dtype=np.int64)
        self.needed = np.ones(U, dtype=np.int64)
        self.se = load.SpectralEfficiency(S, c.se_initial, c.se_alpha, ceiling=c.se_ceiling)
        self.outage = load.OutageTracker(c.outage_window)

        spec = schemes.scheme_spec(c.scheme)
        self.spec = spec
        if spec.lb in ("ucb", "egreedy"):
            self.lb = schemes.BanditLB(S, self.theta, lb_rngs, spec.lb, c.epsilon,
                                       c.lb_normalize, c.ttt, c.lb_settle_steps)
        elif spec.lb == "rule":
            self.lb = schemes.RuleLB(S, self.theta, c.ttt)
        else:
            self.lb = schemes.FixedLB(S, c.ttt)
        if spec.sa in ("ucb", "egreedy"):
            self.sa = schemes.BanditSA(S, N, sa_rngs, spec.sa, c.epsilon, c.sa_normalize)
        elif spec.sa == "round_robin":
            self.sa = schemes.RoundRobinSA(N)
        else:
            self.sa = schemes.MaxThroughputSA(N)
        self.params = self.lb.params.copy()
        self.admission = c.admission == "all" or (c.admission == "lb" and spec.lb != "fixed")
        self.t = 0

    # -- channel -----------------------------------------------------------
    def _refresh_channel(self):
        self.gain = channel.link_gains(self.topology, self.users.position, self.radio, self.shadow)
        self.rsrp = channel.rsrp(self.gain, self.cfg.p_rs) if self.U else np.zeros((self.S, 0))

    # -- control steps -----------------------------------------------------
    def _handover(self):
        free = self.N - self.utilization if self.admission else None
        moves = handover.tick_and_decide(self.timers, self.rsrp, self.association.serving,
                                         self.params[:, 0], self.params[:, 1], free)
        for u, target in moves:
            self.association.serving[u] = target
        return len(moves)

    def _allocate(self):
        c = self.cfg
        alloc = Allocation.empty(self.S, self.N)
        serving = self.association.serving
        self.needed = np.ones(self.U, dtype=np.int64)
        for s in range(self.S):
            users = np.flatnonzero(serving == s)
            if users.size == 0:
                continue
            demands = load.demand_subchannels(self.users.demand[users], self.se.value[s],
                                              self.radio.subchannel_bw)
            demands = np.atleast_1d(demands)
            self.needed[users] = demands
            row = self.sa.allocate(s, users, demands, self.rsrp[s])
            held = row >= 0
            power = np.zeros(self.N)
            if self.spec.power == "pa":
                power[held] = schemes.pa_assign(self.rsrp[s, row[held]], self.levels, c.pa_inverted)
            else:
                power[held] = self.levels.levels[1]
            schemes.enforce_power_cap(row, power, c.p_max, self.levels, self.rsrp[s])
            alloc.owner[s] = row
            alloc.power[s] = power
        self.allocation = alloc

    def _drop_stale(self):
        owner = self.allocation.owner
        held = owner >= 0
        stale = held & (self.association.serving[np.where(held, owner, 0)]
                        != np.arange(self.S)[:, None])
        owner[stale] = -1
        self.allocation.power[stale] = 0.0

    def step(self):
        c = self.cfg
        self.t += 1
        t = self.t
        if (t - 1) % c.t1 == 0:
            self.params = self.lb.act(self.utilization, self.N).copy()
        n_ho = self._handover()
        if (t - 1) % c.t3 == 0:
            self._allocate()
        else:
            self._drop_stale()

        fading = (self.rng_fading.exponential(1.0, (self.S, self.S, self.N))
                  if c.fading else None)
        sinr_grid, rates = channel.snapshot_rates(self.allocation, self.gain, self.radio,
                                                  self.U, fading)
        util = self.allocation.utilization()
        self.utilization = util
        eta = load.utilization_diffs(util)

        serving = self.association.serving
        ru_rates = np.bincount(serving, weights=rates, minlength=self.S)[:self.S]
        granted = self.allocation.granted(self.U)
        if c.outage_mode == "rate":
            short = rates < self.users.demand
        else:
            short = granted < self.needed
        if c.fronthaul_cap is not None:
            short = short | self._fronthaul_excess(rates)
            ru_rates = np.minimum(ru_rates, c.fronthaul_cap)
        inst = float(np.mean(short)) if self.U else 0.0
        p_o = self.outage.push(inst)
        sum_rate = float(ru_rates.sum())
        eff = (1.0 - p_o) * sum_rate
        obj = load.objective_value(eta, ru_rates, c.kappa, p_o, self.topology.chi())

        if t % c.t2 == 0:
            self.lb.observe(eta)
        if t % c.t4 == 0:
            for s in range(self.S):
                users = serving == s
                if users.any():
                    self.sa.reward(s, float(rates[users].mean()))
        self.se.update(serving, self.allocation.owner, sinr_grid)

        record = (util.copy(), float(np.std(util)), sum_rate, p_o, eff, obj, n_ho, inst)
        violations = None
        if self.check:
            violations = validate_constraints(self.topology, self.association, self.allocation,
                                              p_max=c.p_max, params=self.params, theta=self.theta)

        mobility.step_positions(self.users, c.dt, self.bounds, self.rng_move,
                                redraw=(t % self.hold_steps == 0), home=self.home)
        self._refresh_channel()
        return record, violations

    def _fronthaul_excess(self, rates):
        """Users pushed over an O-RU's fronthaul cap, weakest RSRP first."""
        cap = self.cfg.fronthaul_cap
        over = np.zeros(self.U, dtype=bool)
        serving = self.association.serving
        for s in range(self.S):
            users = np.flatnonzero(serving == s)
            if users.size == 0 or rates[users].sum() <= cap:
                continue
            order = users[np.argsort(self.rsrp[s, users], kind="stable")]
            excess = rates[users].sum() - cap
            for u in order:
                if excess <= 0:
                    break
                over[u] = True
                excess -= rates[u]
        return over

    def state_dump(self):
        return {
            "step": self.t,
            "scheme": self.cfg.scheme,
            "seed": self.cfg.seed,
            "serving": self.association.serving.tolist(),
            "params": self.params.tolist(),
            "spectral_efficiency": self.se.value.tolist(),
            "lb_agents": self.lb.to_dict(),
            "sa_agents": self.sa.to_dict(),
        }


def run(cfg: RunConfig, check=False):
    """Simulate ``cfg.steps`` steps and return the per-step metric series."""
    sim = Simulation(cfg, check=check)
    T, S = cfg.steps, cfg.oru_count
    util = np.zeros((T, S), dtype=np.int64)
    cols = {k: np.zeros(T) for k in ("std", "rate", "po", "eff", "obj", "inst")}
    hos = np.zeros(T, dtype=np.int64)
    params = np.zeros((T, S, 2), dtype=np.int64)
    max_power = np.zeros(T)
    violations = []
    for i in range(T):
        (u, sd, rate, po, eff, obj, nho, inst), viol = sim.step()
        util[i] = u
        cols["std"][i], cols["rate"][i], cols["po"][i] = sd, rate, po
        cols["eff"][i], cols["obj"][i], cols["inst"][i] = eff, obj, inst
        hos[i] = nho
        params[i] = sim.params
        max_power[i] = sim.allocation.power.sum(axis=1).max()
        if viol:
            violations.extend((i + 1, v) for v in viol)
        if (i + 1) % 1000 == 0:
            log.info("%s seed=%d step %d/%d std=%.2f eff=%.3g", cfg.scheme, cfg.seed,
                     i + 1, T, sd, eff)
    return RunResult(cfg.scheme, cfg.seed, util, cols["std"], cols["rate"], cols["po"],
                     cols["eff"], cols["obj"], hos, cols["inst"], params, violations,
                     max_power, sim.state_dump())
