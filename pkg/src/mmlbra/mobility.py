"""User placement and constant-speed random-direction movement."""
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MobilityConfig:
    user_count: int = 80
    hotspot_fraction: float = 0.7
    hotspot_oru: int = 0
    speed: float = 5.0
    dt: float = 1.0
    direction_hold: float = 30.0
    hotspot_confined: bool = True
    demand_bps: float = 2e6
    hotspot_region: str = "hex"

    def __post_init__(self):
        if not 0.0 <= self.hotspot_fraction <= 1.0:
            raise ValueError("hotspot_fraction must lie in [0, 1]")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.speed < 0:
            raise ValueError("speed must be non-negative")
        if self.user_count < 0:
            raise ValueError("user_count must be non-negative")
        if self.demand_bps <= 0:
            raise ValueError("demand must be positive")
        if self.hotspot_region not in ("disk", "hex"):
            raise ValueError("hotspot_region must be 'disk' or 'hex'")


class Disk:
    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=np.float64)
        self.radius = float(radius)

    def contains(self, pts):
        rel = np.atleast_2d(pts) - self.center
        return np.hypot(rel[:, 0], rel[:, 1]) <= self.radius + 1e-9

    def sample(self, rng, n):
        r = self.radius * np.sqrt(rng.random(n))
        a = rng.uniform(0.0, 2 * np.pi, n)
        return self.center + np.column_stack([r * np.cos(a), r * np.sin(a)])

    def reflect(self, pos, vel):
        rel = pos - self.center
        dist = np.hypot(rel[:, 0], rel[:, 1])
        out = dist > self.radius
        if not out.any():
            return
        normal = rel[out] / dist[out, None]
        pos[out] = self.center + normal * (2 * self.radius - dist[out, None])
        v = vel[out]
        vel[out] = v - 2 * np.sum(v * normal, axis=1)[:, None] * normal
        # an overshoot longer than the diameter cannot be mirrored back inside
        rel = pos - self.center
        dist = np.hypot(rel[:, 0], rel[:, 1])
        far = dist > self.radius
        pos[far] = self.center + rel[far] * (self.radius / dist[far])[:, None]


class Hexagon:
    """Hexagonal cell with inradius ``apothem``, faces normal to 0, 60, 120 degrees."""

    NORMALS = np.array([[np.cos(a), np.sin(a)] for a in np.deg2rad([0.0, 60.0, 120.0])])

    def __init__(self, center, apothem):
        self.center = np.asarray(center, dtype=np.float64)
        self.apothem = float(apothem)

    def contains(self, pts):
        proj = (np.atleast_2d(pts) - self.center) @ self.NORMALS.T
        return np.all(np.abs(proj) <= self.apothem + 1e-9, axis=1)

    def sample(self, rng, n):
        out = np.empty((0, 2))
        circum = 2 * self.apothem / np.sqrt(3.0)
        disk = Disk(self.center, circum)
        while len(out) < n:
            cand = disk.sample(rng, max(2 * (n - len(out)), 8))
            out = np.vstack([out, cand[self.contains(cand)]])
        return out[:n]

    def reflect(self, pos, vel):
        for _ in range(4):
            proj = (pos - self.center) @ self.NORMALS.T
            over = np.abs(proj) - self.apothem
            k = np.argmax(over, axis=1)
            out = over[np.arange(len(pos)), k] > 0
            if not out.any():
                return
            sign = np.sign(proj[out, k[out]])
            normal = self.NORMALS[k[out]] * sign[:, None]
            pos[out] -= 2 * over[out, k[out]][:, None] * normal
            v = vel[out]
            vel[out] = v - 2 * np.sum(v * normal, axis=1)[:, None] * normal


@dataclass
class Users:
    """Struct-of-arrays user state; ``confined`` users stay inside the home region."""

    position: np.ndarray
    speed: np.ndarray
    heading: np.ndarray
    demand: np.ndarray
    confined: np.ndarray

    def __len__(self):
        return len(self.speed)

    @property
    def ids(self):
        return np.arange(len(self))

    def copy(self):
        return Users(self.position.copy(), self.speed.copy(), self.heading.copy(),
                     self.demand.copy(), self.confined.copy())


def hotspot_region(config, topology):
    center = topology.oru_positions[config.hotspot_oru]
    if config.hotspot_region == "hex":
        return Hexagon(center, topology.inter_site_distance / 2.0)
    return Disk(center, topology.cell_radius)


def _uniform_layout(rng, n, topology):
    xmin, xmax, ymin, ymax = topology.bounds()
    out = np.empty((0, 2))
    while len(out) < n:
        k = max(2 * (n - len(out)), 16)
        cand = np.column_stack([rng.uniform(xmin, xmax, k), rng.uniform(ymin, ymax, k)])
        out = np.vstack([out, cand[topology.in_layout(cand)]])
    return out[:n]


def init_positions(config, topology, rng):
    """Place ``ceil(fraction * U)`` users in the hotspot cell, the rest over the layout.

    Hotspot users come first in the returned arrays. Headings are uniform.
    """
    if not 0 <= config.hotspot_oru < topology.oru_count:
        raise ValueError(f"hotspot O-RU {config.hotspot_oru} out of range")
    U = config.user_count
    n_hot = min(U, math.ceil(config.hotspot_fraction * U - 1e-9))
    region = hotspot_region(config, topology)
    pos = np.vstack([region.sample(rng, n_hot), _uniform_layout(rng, U - n_hot, topology)])
    heading = rng.uniform(0.0, 2 * np.pi, U)
    confined = np.zeros(U, dtype=bool)
    if config.hotspot_confined:
        confined[:n_hot] = True
    return Users(pos, np.full(U, float(config.speed)), heading,
                 np.full(U, float(config.demand_bps)), confined)


def _reflect_box(pos, vel, bounds):
    xmin, xmax, ymin, ymax = bounds
    for axis, lo, hi in ((0, xmin, xmax), (1, ymin, ymax)):
        for _ in range(4):
            low = pos[:, axis] < lo
            high = pos[:, axis] > hi
            if not (low.any() or high.any()):
                break
            pos[low, axis] = 2 * lo - pos[low, axis]
            pos[high, axis] = 2 * hi - pos[high, axis]
            vel[low | high, axis] *= -1.0
        np.clip(pos[:, axis], lo, hi, out=pos[:, axis])


def step_positions(users, dt, bounds, rng=None, redraw=False, home=None):
    """Advance every user by ``speed * dt`` along its heading, in place.

    Users reflect specularly off the bounding box and confined users also
    off ``home``. With ``redraw`` set, headings are re-drawn from ``rng``
    before moving.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if redraw:
        users.heading[:] = rng.uniform(0.0, 2 * np.pi, len(users))
    moving = users.speed > 0
    if not moving.any():
        return users
    vel = users.speed[:, None] * np.column_stack([np.cos(users.heading), np.sin(users.heading)])
    pos = users.position + vel * dt
    vel0 = vel.copy()
    inside = users.confined & moving
    if home is not None and inside.any():
        p, v = pos[inside], vel[inside]
        home.reflect(p, v)
        pos[inside], vel[inside] = p, v
    _reflect_box(pos, vel, bounds)
    users.position[moving] = pos[moving]
    turned = moving & np.any(vel != vel0, axis=1)
    users.heading[turned] = np.arctan2(vel[turned, 1], vel[turned, 0]) % (2 * np.pi)
    return users
