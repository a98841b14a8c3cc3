"""The selected limit u^0 = lim u^lam by three routes, and the convergence check.

* :func:`limit_by_barrier`  u^0(x) = min over extreme Mather measures mu of
  int L_u h(., x) dmu / int L_u dmu.  The ratio is linear-fractional in mu with
  a strictly negative denominator, so its infimum over the convex hull of the
  Mather set is attained at an extreme point.
* :func:`limit_by_subsolution_sup`  u^0(x0) = max w(x0) over discrete critical
  subsolutions w with int L_u w dmu >= 0 for every Mather measure.  The measure
  constraint is linear in mu, so imposing it on the extreme points imposes it on
  the hull.  Solved through the LP dual, which is a flow problem.
* :func:`limit_special_case`  u^0(x) = min_{y in A} h(y, x), valid when constants
  are subsolutions (G(x, 0) <= c).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bellman import LaxOleinik, ValueFunction, solve_discounted
from .errors import ConvergenceFailure, DegenerateWeight, LPInfeasible, LPUnbounded, PreconditionFailed
from .mather import EdgeMeasure
from .scheme import CostGraph
from .simplex import PIVOT_TOL, solve_lp

DEGENERATE_TOL = 1e-12


def _weights(graph: CostGraph, lu0) -> np.ndarray:
    return graph.edge_lu0 if lu0 is None else np.asarray(lu0, dtype=float)


def measure_node_weights(mu: EdgeMeasure, lu0=None) -> np.ndarray:
    """b(n) = sum over edges leaving n of L_u(e) mu(e), so int L_u f(src) dmu = b . f."""
    g = mu.graph
    return np.bincount(g.edge_src, weights=_weights(g, lu0) * mu.weights, minlength=g.N)


def barrier_ratios(h: np.ndarray, measures: Sequence[EdgeMeasure], lu0=None) -> np.ndarray:
    """[k, x] -> int L_u h(., x) dmu_k / int L_u dmu_k."""
    if not measures:
        raise ValueError("need at least one Mather measure")
    rows = []
    for k, mu in enumerate(measures):
        b = measure_node_weights(mu, lu0)
        den = float(b.sum())
        if den >= -DEGENERATE_TOL:
            raise DegenerateWeight(f"measure {k}: int L_u dmu = {den:.3e} is not negative")
        rows.append((b @ h) / den)
    return np.array(rows)


def limit_by_barrier(h: np.ndarray, measures: Sequence[EdgeMeasure], lu0=None) -> ValueFunction:
    ratios = barrier_ratios(h, measures, lu0)
    vals = ratios.min(axis=0)
    return ValueFunction(vals, measures[0].graph.scheme,
                         {"route": "barrier", "selected": ratios.argmin(axis=0).tolist()})


class SubsolutionLP:
    """Dual of  max w(x0)  s.t.  w(x) - w(y) <= r(y, x),  b_k . w >= 0.

    Unknowns are a flow y_e >= 0 on the non-loop edges and multipliers z_k >= 0:

        min sum_e r_e y_e   s.t.   inflow(n) - outflow(n) - sum_k z_k b_k(n) = [n == x0].

    Self-loops give empty primal constraints (r >= 0 at the critical level) and
    are dropped.  Strong duality makes the optimum equal to max w(x0).
    """

    def __init__(self, graph: CostGraph, measures: Sequence[EdgeMeasure], c: float, lu0=None):
        self.graph = graph
        N = graph.N
        keep = graph.edge_src != graph.edge_dst
        self.edges = np.flatnonzero(keep)
        r = graph.reduced_edges(c)[keep]
        B = np.array([measure_node_weights(mu, lu0) for mu in measures])  # [k, n]
        n_y = self.edges.size
        A = np.zeros((N, n_y + len(measures)))
        cols = np.arange(n_y)
        A[graph.edge_dst[keep], cols] += 1.0
        A[graph.edge_src[keep], cols] -= 1.0
        A[:, n_y:] = -B.T
        self.A = A
        self.cost = np.concatenate([r, np.zeros(len(measures))])

    def solve(self, x0: int, tol: float = PIVOT_TOL) -> float:
        rhs = np.zeros(self.graph.N)
        rhs[int(x0)] = 1.0
        try:
            res = solve_lp(self.cost, self.A, rhs, tol=tol)
        except LPInfeasible as exc:  # dual infeasible: primal unbounded
            raise LPUnbounded(f"subsolution LP at node {x0} is unbounded") from exc
        except LPUnbounded as exc:  # dual unbounded: primal infeasible
            raise LPInfeasible(f"subsolution LP at node {x0} is infeasible") from exc
        return res.value


def limit_by_subsolution_sup(x0: int, graph: CostGraph, measures: Sequence[EdgeMeasure], c: float,
                             lu0=None) -> float:
    return SubsolutionLP(graph, measures, c, lu0).solve(x0)


def limit_by_subsolution_sup_all(graph: CostGraph, measures: Sequence[EdgeMeasure], c: float,
                                 lu0=None, nodes=None) -> np.ndarray:
    """The LP route at every node (or at ``nodes``); NaN elsewhere."""
    lp = SubsolutionLP(graph, measures, c, lu0)
    out = np.full(graph.N, np.nan)
    for x in range(graph.N) if nodes is None else nodes:
        out[int(x)] = lp.solve(int(x))
    return out


def constants_are_subsolutions(graph: CostGraph, c: float, tol: float = 1e-9) -> bool:
    xs = graph.scheme.centered_positions
    return bool(np.all(graph.model.critical_hamiltonian(xs, 0.0) <= c + tol))


def limit_special_case(h: np.ndarray, A, graph: CostGraph, c: float, tol: float = 1e-9) -> ValueFunction:
    """min_{y in A} h(y, x); requires G(x, 0) <= c(G) + tol on the grid."""
    if not constants_are_subsolutions(graph, c, tol):
        xs = graph.scheme.centered_positions
        worst = float(np.max(graph.model.critical_hamiltonian(xs, 0.0)) - c)
        raise PreconditionFailed(f"max_x G(x, 0) - c = {worst:.3e} > tol; constants are not subsolutions")
    A = np.asarray(A, dtype=np.intp)
    return ValueFunction(h[A].min(axis=0), graph.scheme, {"route": "special"})


def critical_residual(graph: CostGraph, u, c: float) -> float:
    """sup |T_0[u] - u| at level c; zero for an exact discrete critical solution."""
    u = np.asarray(u, dtype=float)
    return float(np.max(np.abs(LaxOleinik(graph, 0.0, c).apply_raw(u) - u)))


@dataclass
class ConvergenceRow:
    lam: float
    sup_error: float
    lip: float
    norm: float


@dataclass
class ConvergenceTable:
    rows: list[ConvergenceRow]
    solutions: list[ValueFunction] = field(default_factory=list, repr=False)
    passed: bool = True
    messages: list[str] = field(default_factory=list)

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.sup_error for r in self.rows])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lambda", "sup_error", "lip", "norm"])
            for r in self.rows:
                w.writerow(["%.17g" % v for v in (r.lam, r.sup_error, r.lip, r.norm)])


def is_nonincreasing(values, slack: float) -> bool:
    """v[i+1] <= (1 + slack) v[i] for all i."""
    v = np.asarray(values, dtype=float)
    return bool(np.all(v[1:] <= (1.0 + slack) * v[:-1] + 1e-15))


def verify_convergence(
    graph: CostGraph,
    lambdas: Sequence[float],
    u0,
    c: float,
    eps_conv: float = 0.05,
    tol: float = 1e-9,
    slack: float = 0.10,
    warm_start=None,
    alpha0: float | None = None,
    raise_on_failure: bool = True,
) -> ConvergenceTable:
    """Solve u^lam along a decreasing list of lambdas and tabulate ||u^lam - u0||.

    Checks that the error column is nonincreasing within ``slack`` and that the
    last error is at most ``eps_conv``.
    """
    lams = [float(l) for l in lambdas]
    if any(b >= a for a, b in zip(lams, lams[1:])):
        raise ValueError("lambdas must be strictly decreasing")
    target = np.asarray(u0, dtype=float)
    rows, sols = [], []
    start = target if warm_start is None else np.asarray(warm_start, dtype=float)
    for lam in lams:
        u = solve_discounted(graph, lam, c, tol=tol, u0=start, alpha0=alpha0)
        start = u.values
        rows.append(ConvergenceRow(lam, float(np.max(np.abs(u.values - target))), u.lipschitz, u.sup_norm))
        sols.append(u)
    table = ConvergenceTable(rows, sols)
    errs = table.errors
    if not is_nonincreasing(errs, slack):
        table.passed = False
        table.messages.append("error column is not nonincreasing within slack")
    if errs[-1] > eps_conv:
        table.passed = False
        table.messages.append(f"final error {errs[-1]:.4g} exceeds eps_conv={eps_conv}")
    if not table.passed and raise_on_failure:
        raise ConvergenceFailure("; ".join(table.messages), rows)
    return table


def remainder_bound(u_lam, occupation, w, lu0=None) -> float:
    """rho such that u^lam(x) >= w(x) - int L_u w dmu_x / int L_u dmu_x - rho.

    Returns the smallest such rho (negative values mean the bound holds with room).
    """
    b = measure_node_weights(occupation, lu0)
    w = np.asarray(w, dtype=float)
    x = occupation.start
    ratio = float(b @ w) / float(b.sum())
    return float(w[x] - ratio - np.asarray(u_lam, dtype=float)[x])
