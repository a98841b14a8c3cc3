"""Acceptance criteria 1-9.  Each test prints one PASS/FAIL line with its measured numbers."""

import numpy as np
import pytest

from weakkam import oracles
from weakkam.bellman import LaxOleinik, solve_discounted
from weakkam.config import bundled_config, load_config
from weakkam.critical import compute_barrier, critical_value
from weakkam.limit import (
    constants_are_subsolutions,
    is_nonincreasing,
    limit_by_barrier,
    limit_by_subsolution_sup_all,
    limit_special_case,
    verify_convergence,
)
from weakkam.mather import extreme_mather_measures, mather_lp_certificate
from weakkam.occupation import check_selection_inequality, weak_convergence_diagnostics
from weakkam.pipeline import refine
from weakkam.scheme import DiscreteScheme, build_graph

from conftest import Setup, closed_form_barrier, pendulum_model, two_well_model

LAMBDAS = [0.4, 0.2, 0.1, 0.05, 0.025]
LP_TOL = 1e-9
VALID_BUNDLED = ["pendulum", "two_well_weighted", "cubic", "state_weighted"]


@pytest.fixture
def report(capsys):
    def _report(n, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return _report


def test_criterion_1_critical_value(report, pendulum200):
    g = pendulum200.graph
    c = critical_value(g)
    lp_value, _ = mather_lp_certificate(g)
    c_lp = -lp_value / g.tau + 0.0
    ok = abs(c) <= 1e-9 and abs(c - c_lp) <= 1e-9
    report(1, ok, f"c = {c:.3e}, LP certificate c = {c_lp:.3e} (tol 1e-9)")


def test_criterion_2_barrier_closed_form(report, pendulum200):
    s = pendulum200
    err = float(np.max(np.abs(s.barrier.h[0] - closed_form_barrier(s.scheme.positions))))
    rep = refine(load_config(bundled_config("pendulum")), 3, raise_on_failure=False)
    col = [r.barrier_error for r in rep.rows]
    decreasing = all(b < a for a, b in zip(col, col[1:]))
    ok = err <= 0.05 and decreasing
    report(2, ok, f"sup error at N=200 {err:.4f} (tol 0.05); refine(k=3) errors "
                  + ", ".join(f"N={r.N}: {r.barrier_error:.4f}" for r in rep.rows))


def test_criterion_3_vanishing_discount(report):
    ok, parts = True, []
    for family in ("linear", "cubic", "state_weighted"):
        s = Setup(pendulum_model(family), 200)
        u0 = limit_by_barrier(s.barrier.h, s.measures)
        table = verify_convergence(s.graph, LAMBDAS, u0, s.c, eps_conv=0.05, raise_on_failure=False)
        errs = table.errors
        ok = ok and errs[-1] <= 0.05 and is_nonincreasing(errs, 0.10)
        parts.append(f"{family} " + "/".join(f"{e:.4f}" for e in errs))
    report(3, ok, "||u^lam - u0|| over lambda=0.4..0.025: " + "; ".join(parts)
                  + " (final tol 0.05, 10% slack)")


def test_criterion_4_route_agreement(report, pendulum100, two_well100):
    ok, parts = True, []
    for name, s in (("pendulum", pendulum100), ("two_well", two_well100)):
        u0 = limit_by_barrier(s.barrier.h, s.measures).values
        lp = limit_by_subsolution_sup_all(s.graph, s.measures, s.c)
        gap = float(np.max(np.abs(lp - u0)))
        ok = ok and gap <= 1e-6 + LP_TOL
        part = f"{name} N={s.graph.N} barrier vs LP {gap:.1e}"
        if constants_are_subsolutions(s.graph, s.c):
            sp = limit_special_case(s.barrier.h, s.barrier.A, s.graph, s.c).values
            gap_sp = max(float(np.max(np.abs(sp - u0))), float(np.max(np.abs(sp - lp))))
            ok = ok and gap_sp <= 1e-6 + LP_TOL
            part += f", special case {gap_sp:.1e}"
        parts.append(part)
    report(4, ok, "max over all nodes: " + "; ".join(parts) + f" (tol 1e-6 + {LP_TOL:g})")


def test_criterion_5_monotone_family(report):
    ok, parts = True, []
    for family in ("linear", "cubic", "state_weighted", "two_well"):
        model = two_well_model() if family == "two_well" else pendulum_model(family)
        s = Setup(model, 200)
        assert constants_are_subsolutions(s.graph, s.c)
        sols = np.array([solve_discounted(s.graph, lam, s.c).values for lam in LAMBDAS])
        lowest = float(sols.min())
        worst_drop = float(np.max(sols[:-1] - sols[1:]))  # > 0 would mean u decreased as lambda fell
        ok = ok and lowest >= -1e-9 and worst_drop <= 0.0
        parts.append(f"{family} min {lowest:.1e} drop {worst_drop:.1e}")
    report(5, ok, "min u^lam (>= -1e-9) and largest nodewise decrease as lambda falls (<= 0): "
                  + "; ".join(parts))


def test_criterion_6_occupation_selection(report, pendulum200):
    s = pendulum200
    d = weak_convergence_diagnostics(s.graph, s.c, s.measures, s.graph.N // 2, LAMBDAS)
    gap, closed, tv = d.column("action_gap"), d.column("closedness_residual"), d.column("tv_to_mather_hull")
    ok = (gap[-1] <= 0.05 and closed[-1] <= 10 * LAMBDAS[-1] and tv[-1] <= 0.1
          and gap[-1] < gap[0] and closed[-1] < closed[0])
    report(6, ok, f"x=N/2: action gap {gap[0]:.4f} -> {gap[-1]:.4f} (tol 0.05), closedness "
                  f"{closed[0]:.2e} -> {closed[-1]:.2e} (tol {10 * LAMBDAS[-1]:g}), TV {tv[-1]:.4f} (tol 0.1)")


def test_criterion_7_selection_inequality(report):
    ok, parts = True, []
    for name in VALID_BUNDLED:
        cfg = load_config(bundled_config(name))
        g = build_graph(cfg.model, cfg.scheme)
        b = compute_barrier(g)
        ms = extreme_mather_measures(g, b.c, b)
        sel = check_selection_inequality(limit_by_barrier(b.h, ms), ms, tol=1e-8)
        ok = ok and sel.passed
        parts.append(f"{name} ({len(ms)} measures) {sel.value:.1e}")
    report(7, ok, "min of int L_u u0 dmu over extreme measures (>= -1e-8): " + "; ".join(parts))


def test_criterion_8_oracle_equivalence(report):
    ok, parts = True, []
    N, W = 16, 2
    for family in ("linear", "cubic", "state_weighted", "two_well"):
        model = two_well_model() if family == "two_well" else pendulum_model(family)
        g = build_graph(model, DiscreteScheme(N, W=W))
        C = oracles.cost_matrix(model, N, g.tau, W)
        b = compute_barrier(g)
        e_u = max(float(np.max(np.abs(solve_discounted(g, lam, b.c, tol=1e-12).values
                                      - oracles.discounted_fixed_point(model, N, g.tau, W, lam, b.c))))
                  for lam in (0.4, 0.1))
        e_h = float(np.max(np.abs(b.h - oracles.liminf_barrier(C, g.tau, b.c, horizon=2000))))
        best, cycles = oracles.mather_vertices(C)
        same = [m.cycle for m in extreme_mather_measures(g, b.c, b)] == cycles
        e_c = abs(best / g.tau + b.c)
        ok = ok and same and max(e_u, e_h, e_c) <= 1e-8
        parts.append(f"{family} u {e_u:.0e} h {e_h:.0e} c {e_c:.0e} vertices {'same' if same else 'DIFFER'}")
    report(8, ok, "16-point brute force (tol 1e-8): " + "; ".join(parts))


def test_criterion_9_invariants(report):
    rng = np.random.default_rng(20261015)
    N = 64
    graphs = {fam: build_graph(pendulum_model(fam), DiscreteScheme(N, W=4))
              for fam in ("linear", "cubic", "state_weighted")}
    graphs["two_well"] = build_graph(two_well_model(), DiscreteScheme(N, W=4))
    names = sorted(graphs)

    comparison = 0
    for i in range(1000):
        g = graphs[names[i % 4]]
        op = LaxOleinik(g, rng.uniform(0.0, 0.5), 0.0)
        u = rng.uniform(0.0, 2.0, N)
        v = u + rng.uniform(0.0, 1.0, N) * (rng.random(N) < 0.5)
        comparison += int(np.any(op.apply_raw(u) > op.apply_raw(v) + 1e-12))

    contraction = 0
    for i in range(100):
        g = graphs[names[i % 4]]
        lam = rng.uniform(0.01, 0.5)
        op = LaxOleinik(g, lam, 0.0)
        # nonnegative arguments: a g'(lam u) >= a g'(0) >= B1 for every family
        u, v = rng.uniform(0.0, 2.0, N), rng.uniform(0.0, 2.0, N)
        rate = 1.0 - g.tau * lam * g.lu0_bounds[0]
        d = np.max(np.abs(op.apply_raw(u) - op.apply_raw(v)))
        contraction += int(d > rate * np.max(np.abs(u - v)) + 1e-13)

    fenchel = 0
    n_fy = 10_000
    for i, name in enumerate(names):
        m = graphs[name].model
        k = n_fy // 4
        x, v, p = rng.random(k), rng.normal(0, 4, k), rng.normal(0, 4, k)
        u = rng.uniform(-2.0, 2.0, k)
        fenchel += int(np.sum(m.lagrangian(x, v, u) + m.hamiltonian(x, p, u) < p * v - 1e-12))

    closed, n_measures = 0, 0
    for name in names:
        g = graphs[name]
        b = compute_barrier(g)
        ms = list(extreme_mather_measures(g, b.c, b)) + [mather_lp_certificate(g)[1]]
        n_measures += len(ms)
        closed += sum(int(mu.closedness_residual > 1e-10) for mu in ms)

    total = comparison + contraction + fenchel + closed
    report(9, total == 0, f"violations: comparison {comparison}/1000, contraction {contraction}/100, "
                          f"Fenchel-Young {fenchel}/{n_fy}, closedness {closed}/{n_measures}")
