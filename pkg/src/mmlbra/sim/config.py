"""Run configuration, presets and the YAML configuration file format."""
import dataclasses
from dataclasses import dataclass, field, fields

import yaml

from ..core import ConfigurationError
from ..schemes import (DESK_HYSTERESES, DESK_OFFSETS, FULL_HYSTERESES, FULL_OFFSETS,
                       SCHEMES)


@dataclass
class RunConfig:
    # topology
    odu_count: int = 3
    oru_count: int = 7
    isd: float = 500.0
    h_bs: float = 25.0
    h_ut: float = 1.5
    # radio
    n0_dbm_hz: float = -174.0
    subchannel_bw: float = 360e3
    n_subchannels: int = 80
    fc_ghz: float = 3.5
    p_rs: float = 1.0
    shadowing: bool = False
    shadowing_std_db: float = 6.0
    fading: bool = False
    # users
    user_count: int = 80
    hotspot_fraction: float = 0.7
    hotspot_oru: int = 0
    hotspot_confined: bool = True
    hotspot_region: str = "hex"
    speed: float = 5.0
    direction_hold: float = 30.0
    demand_bps: float = 2e6
    # handover
    ttt: float = 2.56
    admission: str = "lb"
    offsets: list = field(default_factory=lambda: list(FULL_OFFSETS))
    hystereses: list = field(default_factory=lambda: list(FULL_HYSTERESES))
    # power
    pa_thresholds: list = field(default_factory=lambda: [-80.0, -90.0, -100.0])
    pa_levels: list = field(default_factory=lambda: [0.5, 1.25, 3.75, 5.0])
    pa_inverted: bool = False
    p_max: float = 120.0
    # load and metrics
    se_initial: float = 4.0
    se_alpha: float = 0.5
    se_ceiling: float = 5.5547
    outage_window: int = 100
    outage_mode: str = "subchannel"
    kappa: float = 0.01
    fronthaul_cap: float = None
    # learning
    epsilon: float = 0.1
    lb_normalize: bool = True
    sa_normalize: bool = True
    lb_settle_steps: int = 0
    # control loop
    scheme: str = "mmlbra"
    t1: int = 10
    t2: int = 1
    t3: int = 1
    t4: int = 1
    dt: float = 1.0
    steps: int = 30000
    seed: int = 0
    out: str = None
    # sweep axes
    sweep_speeds: list = field(default_factory=lambda: [1.0, 5.0, 10.0, 20.0])
    sweep_users: list = field(default_factory=lambda: [80])
    sweep_seeds: list = field(default_factory=lambda: [0, 1, 2, 3, 4])
    sweep_schemes: list = field(default_factory=lambda: ["mmlbra", "rlbra", "epsilon_greedy", "default"])
    burn_in_fraction: float = 0.5

    def validate(self):
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"unknown scheme {self.scheme!r}")
        if self.oru_count not in (1, 7, 19):
            raise ConfigurationError("oru_count must be 1, 7 or 19")
        if not 1 <= self.odu_count <= self.oru_count:
            raise ConfigurationError("odu_count must lie in [1, oru_count]")
        if not 0 <= self.hotspot_oru < self.oru_count:
            raise ConfigurationError("hotspot_oru out of range")
        if self.steps < 0:
            raise ConfigurationError("steps must be non-negative")
        if self.dt <= 0:
            raise ConfigurationError("dt must be positive")
        for name in ("t1", "t2", "t3", "t4"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be at least one step")
        if self.t2 > self.t1 or self.t4 > self.t3:
            raise ConfigurationError("periods must satisfy T2 <= T1 and T4 <= T3")
        if not 0.0 <= self.hotspot_fraction <= 1.0:
            raise ConfigurationError("hotspot_fraction must lie in [0, 1]")
        if self.user_count < 0 or self.speed < 0 or self.demand_bps <= 0:
            raise ConfigurationError("user_count, speed must be >= 0 and demand > 0")
        if self.p_max <= 0:
            raise ConfigurationError("p_max must be positive")
        if not self.offsets or not self.hystereses:
            raise ConfigurationError("handover parameter set is empty")
        if min(self.offsets) < -15 or max(self.offsets) > 15:
            raise ConfigurationError("offsets must lie in [-15, 15] dB")
        if min(self.hystereses) < 0 or max(self.hystereses) > 15:
            raise ConfigurationError("hystereses must lie in [0, 15] dB")
        if self.hotspot_region not in ("disk", "hex"):
            raise ConfigurationError("hotspot_region must be 'disk' or 'hex'")
        if self.admission not in ("lb", "all", "none"):
            raise ConfigurationError("admission must be 'lb', 'all' or 'none'")
        if self.outage_mode not in ("subchannel", "rate"):
            raise ConfigurationError("outage_mode must be 'subchannel' or 'rate'")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigurationError("epsilon must lie in [0, 1]")
        if not 0.0 <= self.burn_in_fraction < 1.0:
            raise ConfigurationError("burn_in_fraction must lie in [0, 1)")
        return self

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclasses.asdict(self)


def _coerce(cfg):
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if f.type is float and isinstance(v, int) and not isinstance(v, bool):
            setattr(cfg, f.name, float(v))
    return cfg


PRESETS = {
    "paper": dict(steps=30000, fading=True, lb_normalize=False, sa_normalize=False),
    "desk": dict(steps=3000, fading=True, lb_normalize=False, sa_normalize=False,
                 offsets=list(DESK_OFFSETS), hystereses=list(DESK_HYSTERESES)),
}


def preset(name, **overrides):
    try:
        base = PRESETS[name]
    except KeyError:
        raise ConfigurationError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}") from None
    return _coerce(RunConfig(**{**base, **overrides}))


def from_dict(d):
    known = {f.name for f in fields(RunConfig)}
    unknown = set(d) - known
    if unknown:
        raise ConfigurationError(f"unknown configuration keys: {sorted(unknown)}")
    return _coerce(RunConfig(**d))


def load_config(path, base=None):
    """Read a YAML config; keys override ``base``, or the file's own ``preset`` key."""
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: expected a mapping at the top level")
    name = data.pop("preset", None)
    if base is None:
        base = preset(name) if name else RunConfig()
    return from_dict({**base.to_dict(), **data})


# Comments name the model symbol each key stands for.
_COMMENTS = {
    "odu_count": "G, number of O-DUs",
    "oru_count": "S, number of O-RUs (1, 7 or 19 hexagonal sites)",
    "isd": "inter-site distance, m",
    "h_bs": "O-RU antenna height, m",
    "h_ut": "UE antenna height, m",
    "n0_dbm_hz": "N0, noise power spectral density, dBm/Hz",
    "subchannel_bw": "W, subchannel bandwidth, Hz",
    "n_subchannels": "N, subchannels per O-RU",
    "fc_ghz": "fc, centre frequency, GHz",
    "p_rs": "reference-signal power used for RSRP, W",
    "speed": "user speed, m/s",
    "demand_bps": "D, per-user rate demand, bit/s",
    "ttt": "TTT, time to trigger, s",
    "offsets": "Off, A3 event offsets available to each O-RU, dB",
    "hystereses": "Hys, hysteresis values available to each O-RU, dB",
    "pa_thresholds": "{RSRP_T1, RSRP_T2, RSRP_T3}, dBm",
    "pa_levels": "{p1, p2, p3, p4}, W",
    "p_max": "P^(Max), per-O-RU transmit power budget, W",
    "kappa": "kappa, rate weight in the objective (metric only)",
    "fronthaul_cap": "C^(Max), per-O-RU fronthaul capacity, bit/s (null = off)",
    "se_initial": "initial C, spectral efficiency, bit/s/Hz",
    "t1": "T1, load-balancing action period, steps",
    "t2": "T2, load-balancing reward period, steps",
    "t3": "T3, resource-allocation action period, steps",
    "t4": "T4, resource-allocation reward period, steps",
    "steps": "iter, simulated steps",
    "epsilon": "epsilon for the epsilon-greedy baseline",
    "lb_normalize": "min-max scale load-balancing rewards into [0, 1] (false = raw -eta)",
    "sa_normalize": "min-max scale allocation rewards into [0, 1] (false = raw bit/s)",
    "hotspot_fraction": "share of users placed in the hotspot cell",
    "user_count": "U, number of users",
}


def dump_config(cfg, path=None):
    """Serialise ``cfg`` to commented YAML; returns the text."""
    lines = []
    for key, value in cfg.to_dict().items():
        text = yaml.safe_dump({key: value}, default_flow_style=True, width=10_000).strip()
        if text.startswith("{") and text.endswith("}"):
            text = text[1:-1]
        note = _COMMENTS.get(key)
        lines.append(f"{text}  # {note}" if note else text)
    out = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(out)
    return out
