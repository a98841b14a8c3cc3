import numpy as np
import pytest
from scipy.optimize import linprog

from weakkam import oracles
from weakkam.critical import compute_barrier
from weakkam.errors import CycleExplosion
from weakkam.mather import (
    ClosedMeasure,
    EdgeMeasure,
    action,
    cycle_measure,
    extreme_mather_measures,
    mather_lp_certificate,
)
from weakkam.scheme import DiscreteScheme, build_graph

from conftest import flat_model, pendulum_model, two_well_model


def graph_of(model, N=16, W=2):
    return build_graph(model, DiscreteScheme(N, W=W))


def test_self_loop_actions():
    g = graph_of(pendulum_model())
    assert action(cycle_measure(g, [0])) == 0.0
    assert action(cycle_measure(g, [4])) == pytest.approx(1.0)  # node 0.25 is not Aubry
    flat = graph_of(flat_model())
    w = np.zeros(flat.n_edges)
    w[[flat.edge_index(i, i) for i in range(16)]] = 1 / 16
    assert action(ClosedMeasure(flat, w)) == 0.0


def test_closed_measure_validation():
    g = graph_of(pendulum_model())
    w = np.zeros(g.n_edges)
    w[g.edge_index(0, 1)] = 1.0
    with pytest.raises(ValueError):
        ClosedMeasure(g, w)
    with pytest.raises(ValueError):
        ClosedMeasure(g, 0.5 * cycle_measure(g, [0, 1]).weights)
    with pytest.raises(ValueError):
        EdgeMeasure(g, -w)
    mu = cycle_measure(g, [0, 1, 2, 1])
    assert mu.closedness_residual == 0.0 and mu.total == pytest.approx(1.0)


@pytest.mark.parametrize("model", [pendulum_model(), two_well_model()])
def test_extreme_measures_match_vertex_oracle(model):
    g = graph_of(model)
    found = [mu.cycle for mu in extreme_mather_measures(g)]
    best, cycles = oracles.mather_vertices(oracles.cost_matrix(model, 16, g.tau, 2))
    assert found == cycles
    assert best == pytest.approx(-compute_barrier(g).c * g.tau, abs=1e-12)


def test_pendulum_single_measure(pendulum200):
    ms = pendulum200.measures
    assert len(ms) == 1 and ms[0].cycle == (0,)
    assert ms[0].weights[pendulum200.graph.edge_index(0, 0)] == 1.0


def test_two_well_two_measures(two_well200):
    ms = two_well200.measures
    assert [m.cycle for m in ms] == [(0,), (100,)]
    for m in ms:
        assert action(m) == pytest.approx(-two_well200.c, abs=1e-12)
        assert m.closedness_residual <= 1e-10


def test_two_well_optimal_face_on_32_points():
    # the optimal face of the Mather LP is spanned by the two rest points
    m = two_well_model()
    g = graph_of(m, 32, 3)
    N, E = g.N, g.n_edges
    A = np.zeros((N + 1, E))
    A[g.edge_dst, np.arange(E)] += 1
    A[g.edge_src, np.arange(E)] -= 1
    A[N] = 1
    b = np.zeros(N + 1)
    b[N] = 1
    opt = linprog(g.edge_cost, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    face_A = np.vstack([A, g.edge_cost])
    face_b = np.concatenate([b, [opt.fun]])
    loops = [g.edge_index(0, 0), g.edge_index(16, 16)]
    outside = np.ones(E)
    outside[loops] = 0
    worst = linprog(-outside, A_eq=face_A, b_eq=face_b, bounds=(0, None), method="highs")
    assert -worst.fun <= 1e-9
    assert [mu.cycle for mu in extreme_mather_measures(g)] == [(0,), (16,)]


def test_flat_potential_cycle_cap():
    g = graph_of(flat_model(), 32, 3)
    assert len(extreme_mather_measures(g)) == 32
    with pytest.raises(CycleExplosion) as info:
        extreme_mather_measures(g, cap=20)
    assert info.value.cap == 20


@pytest.mark.parametrize("model", [pendulum_model(), two_well_model(), flat_model()])
def test_lp_certificate_matches_karp(model):
    g = graph_of(model, 32, 3)
    value, mu = mather_lp_certificate(g)
    c = compute_barrier(g).c
    assert value / g.tau == pytest.approx(-c, abs=1e-9)
    assert mu.closedness_residual <= 1e-10
    assert action(mu) == pytest.approx(-c, abs=1e-9)


def test_measure_csv(tmp_path, pendulum16):
    mu = pendulum16.measures[0]
    mu.to_csv(tmp_path / "m.csv")
    assert (tmp_path / "m.csv").read_text().splitlines() == ["i,j,weight", "0,0,1"]
