import numpy as np
import pytest
from hypothesis import given, strategies as st

from mmlbra.core import (Allocation, Association, ConfigurationError, build_hex_topology,
                         contiguous_partition, initial_association, validate_constraints)


def test_seven_site_layout(topo7):
    pos = topo7.oru_positions
    assert pos.shape == (7, 2)
    assert np.allclose(pos[0], 0.0)
    d = np.hypot(*(pos[1:] - pos[0]).T)
    assert np.allclose(d, 500.0)
    # neighbouring outer sites are also one ISD apart
    ring = pos[1:]
    assert np.allclose(np.hypot(*(ring - np.roll(ring, 1, axis=0)).T), 500.0)


def test_single_site():
    t = build_hex_topology(1, 1, 500.0)
    assert t.oru_positions.tolist() == [[0.0, 0.0]]
    assert t.chi().tolist() == [[1]]


def test_nineteen_sites_distinct():
    t = build_hex_topology(5, 19, 500.0)
    pos = t.oru_positions
    d = np.hypot(*(pos[:, None] - pos[None]).transpose(2, 0, 1))
    np.fill_diagonal(d, np.inf)
    assert np.isclose(d.min(), 500.0)
    # every site has its nearest neighbour exactly one ISD away
    assert np.allclose(d.min(axis=1), 500.0)


def test_odu_partition(topo7):
    assert topo7.oru_to_odu.tolist() == [0, 0, 0, 1, 1, 2, 2]
    chi = topo7.chi()
    assert chi.shape == (3, 7)
    assert (chi.sum(axis=0) == 1).all()


@given(st.integers(1, 19), st.integers(1, 19))
def test_partition_is_contiguous(S, G):
    if G > S:
        return
    p = contiguous_partition(S, G)
    assert len(p) == S and set(p) == set(range(G))
    assert (np.diff(p) >= 0).all()
    sizes = np.bincount(p)
    assert sizes.max() - sizes.min() <= 1


@pytest.mark.parametrize("G,S", [(1, 5), (0, 7), (8, 7)])
def test_bad_topology(G, S):
    with pytest.raises(ConfigurationError):
        build_hex_topology(G, S, 500.0)


def test_layout_membership(topo7):
    assert topo7.in_layout(np.array([[0.0, 0.0], [240.0, 0.0]])).all()
    assert not topo7.in_layout(np.array([[5000.0, 0.0]])).any()


def test_initial_association_argmax_and_ties():
    a = initial_association(np.array([[-70.0, -90.0, -80.0], [-80.0, -85.0, -80.0]]))
    assert a.serving.tolist() == [0, 1, 0]


def test_initial_association_rejects_empty():
    with pytest.raises(ConfigurationError):
        initial_association(np.zeros((0, 3)))


def _state(S=3, U=10, N=8):
    serving = np.arange(U) % S
    alloc = Allocation.empty(S, N)
    for u in range(U):
        alloc.owner[serving[u], u // S] = u
        alloc.power[serving[u], u // S] = 1.25
    return Association(serving), alloc


def test_valid_state_reports_nothing():
    topo = build_hex_topology(1, 7, 500.0)
    assoc, alloc = _state(S=7)
    assert validate_constraints(topo, assoc, alloc, p_max=120.0) == []


def test_two_serving_orus_flagged():
    topo = build_hex_topology(1, 7, 500.0)
    assoc, alloc = _state(S=7)
    phi = assoc.phi(7)
    phi[1, 0] = 1
    out = validate_constraints(topo, phi, alloc.psi(10))
    assert any(v.startswith("C2: user 0") for v in out)


def test_double_assignment_flagged():
    topo = build_hex_topology(1, 7, 500.0)
    assoc, alloc = _state(S=7, U=10)
    phi = assoc.phi(7)
    psi = alloc.psi(10)
    phi[:, 3] = 0
    phi[:, 9] = 0
    phi[2, 3] = phi[2, 9] = 1
    psi[:, 3] = psi[:, 9] = 0
    psi[2, 3, 5] = psi[2, 9, 5] = 1
    out = validate_constraints(topo, phi, psi)
    assert "double assignment: subchannel 5 of O-RU 2 held by users [3, 9]" in out


def test_orphan_power_and_theta_flags():
    topo = build_hex_topology(1, 7, 500.0)
    assoc, alloc = _state(S=7)
    assoc.serving[0] = 1  # user 0 still holds a slot on O-RU 0
    alloc.power[2, :] = 20.0
    params = np.zeros((7, 2), dtype=int)
    params[4] = (7, 1)
    out = validate_constraints(topo, assoc, alloc, p_max=120.0, params=params,
                               theta=[(0, 0), (5, 3)])
    assert any("without being served" in v for v in out)
    assert any(v.startswith("C4: O-RU 2") for v in out)
    assert any(v.startswith("C6: O-RU 4") for v in out)


def test_non_binary_and_chi_override():
    topo = build_hex_topology(1, 7, 500.0)
    assoc, alloc = _state(S=7)
    chi = topo.chi().astype(int)
    chi[0, 0] = 2
    out = validate_constraints(topo, assoc, alloc, chi=chi)
    assert any(v.startswith("C1: chi") for v in out)
    chi = np.zeros((1, 7), dtype=int)
    out = validate_constraints(topo, assoc, alloc, chi=chi)
    assert sum(v.startswith("C3") for v in out) == 7


@given(st.lists(st.integers(-1, 9), min_size=16, max_size=16))
def test_allocation_views_agree(owners):
    owner = np.array(owners).reshape(2, 8)
    alloc = Allocation(owner, np.where(owner >= 0, 1.0, 0.0))
    psi = alloc.psi(10)
    assert (psi.sum(axis=1) == (owner >= 0)).all()
    assert (alloc.granted(10) == psi.sum(axis=(0, 2))).all()
    assert (alloc.utilization() == psi.sum(axis=(1, 2))).all()


def test_release():
    alloc = Allocation(np.array([[0, 1, 0, -1]]), np.array([[1.0, 2.0, 1.0, 0.0]]))
    alloc.release(0, [0])
    assert alloc.owner.tolist() == [[-1, 1, -1, -1]]
    assert alloc.power.tolist() == [[0.0, 2.0, 0.0, 0.0]]
