"""Sanity checks of the brute-force references themselves (hand-sized cases)."""

import math

import networkx as nx
import numpy as np
import pytest

from weakkam import oracles
from weakkam.reference import mechanical_reference

from conftest import closed_form_barrier, flat_model, pendulum_model, two_well_model

INF = math.inf
# 3-node graph: cheap cycle 0 -> 1 -> 0 (mean -1), expensive loop at 2
HAND = np.array([
    [3.0, -2.0, 1.0],
    [0.0, INF, 1.0],
    [1.0, INF, 0.5],
])


def test_displacement_and_positions():
    assert oracles.displacement(0, 15, 16) == -1
    assert oracles.displacement(15, 0, 16) == 1
    assert oracles.displacement(0, 8, 16) == 8
    assert oracles.node_position(12, 16) == -0.25


def test_min_mean_cycle_hand():
    assert oracles.min_mean_cycle_by_powers(HAND) == pytest.approx(-1.0)


def test_simple_cycles_count_matches_networkx():
    C = oracles.cost_matrix(pendulum_model(), 9, 1 / 9, 2)
    mine = list(oracles.simple_cycles(C))
    G = nx.DiGraph([(i, j) for i in range(9) for j in range(9) if np.isfinite(C[i, j])])
    assert len(mine) == sum(1 for _ in nx.simple_cycles(G))
    assert len({tuple(c) for c in mine}) == len(mine)


def test_mather_vertices_hand():
    best, cycles = oracles.mather_vertices(HAND)
    assert best == pytest.approx(-1.0)
    assert cycles == [(0, 1)]


def test_liminf_barrier_hand():
    C = np.array([[0.0, 1.0], [1.0, 0.0]])
    h = oracles.liminf_barrier(C, 1.0, 0.0, horizon=50, window=5)
    assert np.array_equal(h, C)


def test_explicit_oracle_is_a_fixed_point():
    m = pendulum_model("cubic")
    tau, lam = 1 / 12, 0.3
    u = oracles.discounted_fixed_point(m, 12, tau, 2, lam, 0.0)
    C = oracles.cost_matrix(m, 12, tau, 2)
    phi = u - tau * np.array([float(m.g(lam * v)) for v in u])
    assert np.allclose(np.min(phi[:, None] + C, axis=0), u, atol=1e-12)


def test_implicit_oracle_is_a_fixed_point():
    m = pendulum_model("state_weighted")
    tau, lam = 1 / 12, 0.3
    w = oracles.implicit_fixed_point(m, 12, tau, 2, lam, 0.0)
    C = oracles.cost_matrix(m, 12, tau, 2)
    a = np.array([float(m.a(oracles.node_position(y, 12))) for y in range(12)])
    rhs = np.min(w[:, None] + C - tau * a[:, None] * np.expm1(lam * w)[None, :], axis=0)
    assert np.allclose(rhs, w, atol=1e-11)


def test_flat_oracle_fixed_point_is_zero():
    assert np.all(oracles.discounted_fixed_point(flat_model(), 10, 0.1, 2, 0.2, 0.0) == 0.0)


def test_mechanical_reference():
    ref = mechanical_reference(pendulum_model())
    assert ref.c == pytest.approx(0.0, abs=1e-12) and ref.aubry == (0.0,)
    xs = np.linspace(0, 1, 11)
    assert np.allclose(ref.barrier(pendulum_model(), 0.0, xs), closed_form_barrier(xs), atol=1e-10)
    ref2 = mechanical_reference(two_well_model())
    assert ref2.aubry == (0.0, 0.5)
    assert mechanical_reference(flat_model()).degenerate
