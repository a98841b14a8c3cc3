import numpy as np
import pytest

from weakkam import oracles
from weakkam.bellman import solve_discounted
from weakkam.errors import ConvergenceFailure, DegenerateWeight, PreconditionFailed
from weakkam.limit import (
    ConvergenceTable,
    barrier_ratios,
    constants_are_subsolutions,
    critical_residual,
    is_nonincreasing,
    limit_by_barrier,
    limit_by_subsolution_sup,
    limit_by_subsolution_sup_all,
    limit_special_case,
    remainder_bound,
    verify_convergence,
)
from weakkam.occupation import occupation_measure

from conftest import Setup, closed_form_barrier, flat_model, pendulum_model, two_well_model

LAMBDAS = [0.4, 0.2, 0.1, 0.05, 0.025]


def test_barrier_route_pendulum(pendulum200):
    s = pendulum200
    u0 = limit_by_barrier(s.barrier.h, s.measures)
    assert np.array_equal(u0.values, s.barrier.h[0])
    assert u0.meta["route"] == "barrier"
    assert critical_residual(s.graph, u0, s.c) <= 1e-12


def test_barrier_route_state_weighted_cancels():
    s = Setup(pendulum_model("state_weighted"), 64, W=4)
    assert np.array_equal(limit_by_barrier(s.barrier.h, s.measures).values, s.barrier.h[0])


def test_two_well_limit_is_min_of_wells(two_well200):
    s = two_well200
    u0 = limit_by_barrier(s.barrier.h, s.measures)
    assert np.allclose(u0.values, np.minimum(s.barrier.h[0], s.barrier.h[100]), atol=1e-15)
    assert u0[0] == 0.0 and u0[100] == 0.0


def test_two_well_limit_matches_brute_force_extrapolation():
    s = Setup(two_well_model(), 32, W=3)
    u0 = limit_by_barrier(s.barrier.h, s.measures).values
    u = {lam: oracles.discounted_fixed_point(s.model, 32, s.graph.tau, 3, lam, 0.0, tol=1e-13)
         for lam in (0.05, 0.025)}
    # u^lam = u^0 + O(lam): one Richardson step removes the linear term
    assert np.max(np.abs(2 * u[0.025] - u[0.05] - u0)) <= 1e-4


def test_degenerate_weight():
    s = Setup(pendulum_model(), 16, W=2)
    with pytest.raises(DegenerateWeight):
        barrier_ratios(s.barrier.h, s.measures, lu0=np.zeros(s.graph.n_edges))
    with pytest.raises(ValueError):
        barrier_ratios(s.barrier.h, [])


def test_subsolution_route_pendulum(pendulum200):
    s = pendulum200
    assert limit_by_subsolution_sup(0, s.graph, s.measures, s.c) == pytest.approx(0.0, abs=1e-8)
    assert limit_by_subsolution_sup(100, s.graph, s.measures, s.c) == pytest.approx(2 / np.pi, abs=0.05)


def test_subsolution_route_flat():
    s = Setup(flat_model(), 16, W=2)
    vals = limit_by_subsolution_sup_all(s.graph, s.measures, s.c)
    assert np.allclose(vals, 0.0, atol=1e-12)


def test_routes_agree_on_small_grids():
    for model in (pendulum_model(), two_well_model(), pendulum_model("state_weighted")):
        s = Setup(model, 32, W=3)
        u0 = limit_by_barrier(s.barrier.h, s.measures).values
        lp = limit_by_subsolution_sup_all(s.graph, s.measures, s.c)
        assert np.max(np.abs(lp - u0)) <= 1e-6 + 1e-9
        sp = limit_special_case(s.barrier.h, s.barrier.A, s.graph, s.c)
        assert np.max(np.abs(sp.values - u0)) <= 1e-12


def test_subsolution_nodes_subset_leaves_nan(pendulum16):
    s = pendulum16
    vals = limit_by_subsolution_sup_all(s.graph, s.measures, s.c, nodes=[0, 8])
    assert np.isnan(vals[1]) and vals[0] == pytest.approx(0.0, abs=1e-12)


def test_special_case_precondition():
    s = Setup(pendulum_model(), 16, W=2)
    assert constants_are_subsolutions(s.graph, s.c)
    with pytest.raises(PreconditionFailed):
        limit_special_case(s.barrier.h, s.barrier.A, s.graph, s.c - 0.5)
    flat = Setup(flat_model(), 16, W=2)
    assert np.all(limit_special_case(flat.barrier.h, flat.barrier.A, flat.graph, 0.0).values == 0.0)


def test_convergence_pendulum_closed_form(pendulum200):
    s = pendulum200
    u0 = limit_by_barrier(s.barrier.h, s.measures)
    assert np.max(np.abs(u0.values - closed_form_barrier(s.scheme.positions))) <= 0.05
    table = verify_convergence(s.graph, LAMBDAS, u0, s.c)
    assert table.passed and table.errors[-1] <= 0.05
    assert is_nonincreasing(table.errors, 0.1)


def test_convergence_flat_is_exact():
    s = Setup(flat_model(), 32, W=3)
    u0 = limit_by_barrier(s.barrier.h, s.measures)
    table = verify_convergence(s.graph, LAMBDAS, u0, s.c)
    assert np.all(table.errors == 0.0)


def test_convergence_failure_reports_rows(pendulum100):
    s = pendulum100
    u0 = limit_by_barrier(s.barrier.h, s.measures)
    with pytest.raises(ConvergenceFailure) as info:
        verify_convergence(s.graph, [0.4, 0.2], u0, s.c, eps_conv=1e-6)
    assert len(info.value.rows) == 2
    with pytest.raises(ValueError):
        verify_convergence(s.graph, [0.2, 0.4], u0, s.c)


def test_convergence_table_csv(tmp_path, pendulum100):
    s = pendulum100
    u0 = limit_by_barrier(s.barrier.h, s.measures)
    table = verify_convergence(s.graph, [0.4, 0.2], u0, s.c)
    table.to_csv(tmp_path / "conv.csv")
    lines = (tmp_path / "conv.csv").read_text().splitlines()
    assert lines[0] == "lambda,sup_error,lip,norm" and len(lines) == 3
    assert isinstance(table, ConvergenceTable)


def test_remainder_bound_decreases(pendulum100):
    # lower bound u^lam(x) >= w(x) - int L_u w dmu / int L_u dmu - rho(lam) for w = -h(., y)
    s = pendulum100
    x = 50
    rhos = []
    for lam in (0.2, 0.05):
        u = solve_discounted(s.graph, lam, s.c)
        mu = occupation_measure(s.graph, u, lam, s.c, x)
        worst = max(remainder_bound(u, mu, -s.barrier.h[:, y]) for y in (0, 25, 50, 75))
        worst = max(worst, remainder_bound(u, mu, np.ones(s.graph.N)))
        rhos.append(worst)
    assert rhos[1] <= rhos[0] + 1e-12
    assert rhos[1] <= 0.05
