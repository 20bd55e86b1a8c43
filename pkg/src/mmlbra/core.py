"""Network topology, user association and structural constraint checks."""
from dataclasses import dataclass, field

import numpy as np


class ConfigurationError(ValueError):
    """Raised for invalid simulation parameters."""


_RING_SIZES = {1: 0, 7: 1, 19: 2}


@dataclass(frozen=True)
class Topology:
    """One O-CU, ``odu_count`` O-DUs and ``oru_count`` hexagonal O-RU sites.

    ``oru_to_odu[s]`` is the O-DU index hosting O-RU ``s`` (0-based), which is
    the compact form of the binary O-RU/O-DU indicator matrix.
    """

    odu_count: int
    oru_count: int
    oru_positions: np.ndarray
    oru_to_odu: np.ndarray
    inter_site_distance: float = 500.0
    h_bs: float = 25.0
    h_ut: float = 1.5

    @property
    def cell_radius(self):
        # circumradius of a hexagonal cell whose inradius is isd / 2
        return self.inter_site_distance / np.sqrt(3.0)

    def chi(self):
        """Dense (G, S) O-DU/O-RU indicator matrix."""
        out = np.zeros((self.odu_count, self.oru_count), dtype=np.int8)
        out[self.oru_to_odu, np.arange(self.oru_count)] = 1
        return out

    def bounds(self):
        """(xmin, xmax, ymin, ymax) of the simulation region."""
        r = self.cell_radius
        xs, ys = self.oru_positions[:, 0], self.oru_positions[:, 1]
        return (xs.min() - r, xs.max() + r, ys.min() - r, ys.max() + r)

    def in_layout(self, points):
        """Mask of points lying inside any hexagonal cell of the layout."""
        points = np.atleast_2d(points)
        inside = np.zeros(len(points), dtype=bool)
        half = self.inter_site_distance / 2.0
        # cells face their neighbours along 0, 60, 120 degrees
        normals = np.array([[np.cos(a), np.sin(a)] for a in np.deg2rad([0.0, 60.0, 120.0])])
        for c in self.oru_positions:
            proj = np.abs((points - c) @ normals.T)
            inside |= np.all(proj <= half + 1e-9, axis=1)
        return inside


def contiguous_partition(S, G):
    """Split O-RUs 0..S-1 into G contiguous blocks, larger blocks first."""
    base, extra = divmod(S, G)
    sizes = [base + (1 if g < extra else 0) for g in range(G)]
    return np.repeat(np.arange(G), sizes)


def build_hex_topology(G, S, isd, h_bs=25.0, h_ut=1.5):
    if S not in _RING_SIZES:
        raise ConfigurationError(f"unsupported O-RU count {S}; expected one of 1, 7, 19")
    if G < 1 or G > S:
        raise ConfigurationError(f"O-DU count must satisfy 1 <= G <= S, got G={G}, S={S}")
    if isd <= 0:
        raise ConfigurationError("inter-site distance must be positive")

    positions = [(0.0, 0.0)]
    rings = _RING_SIZES[S]
    if rings >= 1:
        positions += [(isd * np.cos(np.pi / 3 * k), isd * np.sin(np.pi / 3 * k)) for k in range(6)]
    if rings >= 2:
        for k in range(6):
            a, b = np.pi / 3 * k, np.pi / 3 * (k + 1)
            corner = np.array([2 * isd * np.cos(a), 2 * isd * np.sin(a)])
            positions.append(tuple(corner))
            mid = isd * np.array([np.cos(a) + np.cos(b), np.sin(a) + np.sin(b)])
            positions.append(tuple(mid))

    pos = np.array(positions, dtype=np.float64)
    pos[np.abs(pos) < 1e-9] = 0.0
    return Topology(G, S, pos, contiguous_partition(S, G), float(isd), float(h_bs), float(h_ut))


@dataclass
class Association:
    """Serving O-RU per user; -1 marks an unattached user."""

    serving: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def phi(self, S):
        """Dense (S, U) user/O-RU association indicators."""
        U = len(self.serving)
        out = np.zeros((S, U), dtype=np.int8)
        att = self.serving >= 0
        out[self.serving[att], np.flatnonzero(att)] = 1
        return out

    def served_by(self, s):
        return np.flatnonzero(self.serving == s)

    def copy(self):
        return Association(self.serving.copy())


def initial_association(rsrp_table):
    """Attach each user to its strongest O-RU; ties go to the lowest index.

    ``rsrp_table`` has shape (S, U) in dBm.
    """
    rsrp_table = np.asarray(rsrp_table, dtype=np.float64)
    if rsrp_table.ndim != 2 or rsrp_table.shape[0] == 0:
        raise ConfigurationError("rsrp table must cover at least one O-RU")
    return Association(np.argmax(rsrp_table, axis=0).astype(np.int64))


def _as_phi(association, S):
    if isinstance(association, Association):
        return association.phi(S)
    return np.asarray(association)


def _as_psi(allocation, U):
    if hasattr(allocation, "psi"):
        return allocation.psi(U)
    return np.asarray(allocation)


def validate_constraints(topology, association, allocation, chi=None,
                         p_max=None, params=None, theta=None):
    """List every structural violation of the current network state.

    ``association`` is an :class:`Association` or a dense (S, U) indicator
    array; ``allocation`` is an allocation object exposing ``psi(U)`` or a
    dense (S, U, N) indicator array. ``chi`` overrides the topology's
    O-RU/O-DU map. When given, ``p_max`` checks the per-O-RU power budget and
    ``params``/``theta`` check that each O-RU's (Off, Hys) pair is allowed.
    An empty list means the state is consistent.
    """
    S = topology.oru_count
    violations = []
    chi = topology.chi() if chi is None else np.asarray(chi)
    phi = _as_phi(association, S)
    U = phi.shape[1]
    psi = _as_psi(allocation, U)

    for name, arr in (("chi", chi), ("phi", phi), ("psi", psi)):
        bad = ~np.isin(arr, (0, 1))
        if bad.any():
            violations.append(f"C1: {name} has {int(bad.sum())} non-binary entries")

    per_user = phi.sum(axis=0)
    for u in np.flatnonzero(per_user > 1):
        violations.append(f"C2: user {u} served by {int(per_user[u])} O-RUs")

    per_oru = chi.sum(axis=0)
    for s in np.flatnonzero(per_oru != 1):
        violations.append(f"C3: O-RU {s} connected to {int(per_oru[s])} O-DUs")

    if psi.size:
        holders = (psi != 0).sum(axis=1)  # (S, N)
        for s, n in zip(*np.nonzero(holders > 1)):
            users = np.flatnonzero(psi[s, :, n])
            violations.append(
                f"double assignment: subchannel {n} of O-RU {s} held by users {users.tolist()}")
        orphan = (psi != 0).any(axis=2) & (phi == 0)
        for s, u in zip(*np.nonzero(orphan)):
            violations.append(f"user {u} holds subchannels of O-RU {s} without being served by it")

    if p_max is not None and hasattr(allocation, "power"):
        totals = allocation.power.sum(axis=1)
        for s in np.flatnonzero(totals > p_max * (1 + 1e-12)):
            violations.append(f"C4: O-RU {s} transmits {totals[s]:.3f} W > {p_max} W")

    if params is not None and theta is not None:
        allowed = set(map(tuple, np.asarray(theta).tolist()))
        for s, pair in enumerate(np.asarray(params).tolist()):
            if tuple(pair) not in allowed:
                violations.append(f"C6: O-RU {s} uses (Off, Hys)={tuple(pair)} outside the set")
    return violations


@dataclass
class Allocation:
    """Subchannel owners and per-subchannel transmit power for every O-RU.

    ``owner[s, n]`` holds the user index granted subchannel ``n`` of O-RU
    ``s`` (-1 when idle) and ``power[s, n]`` the power in W on that slot.
    Storing one owner per slot makes intra-O-RU double assignment
    unrepresentable; :meth:`psi` expands to the dense indicator tensor.
    """

    owner: np.ndarray
    power: np.ndarray

    @classmethod
    def empty(cls, S, N):
        return cls(np.full((S, N), -1, dtype=np.int64), np.zeros((S, N)))

    def psi(self, U):
        S, N = self.owner.shape
        out = np.zeros((S, U, N), dtype=np.int8)
        s_idx, n_idx = np.nonzero(self.owner >= 0)
        out[s_idx, self.owner[s_idx, n_idx], n_idx] = 1
        return out

    def granted(self, U):
        """Number of subchannels held by each of ``U`` users."""
        held = self.owner[self.owner >= 0]
        return np.bincount(held, minlength=U)

    def utilization(self):
        """Occupied subchannels per O-RU."""
        return (self.owner >= 0).sum(axis=1)

    def release(self, s, users):
        mask = np.isin(self.owner[s], users)
        self.owner[s, mask] = -1
        self.power[s, mask] = 0.0

    def copy(self):
        return Allocation(self.owner.copy(), self.power.copy())
