"""Discounted occupation measures along backward minimizing trajectories.

Starting from x, follow the backward policy of u^lam: xi_0 = x, xi_{k+1} = pred(xi_k).
Edge k (xi_{k+1} -> xi_k) receives the weight

    w_k = prod_{j<k} (1 + tau lam L_u(e_j)),

the exact discrete counterpart of exp(lam int L_u ds): with it the telescoping
identity  tau lam sum_k w_k L_u(e_k) = w_inf - 1 = -1  holds to rounding, and for
the linear family the weights are the geometric (1 - tau lam)^k.  As lam -> 0
these measures concentrate on Mather measures.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import nnls

from . import _kernels
from .bellman import ValueFunction, policy, solve_discounted
from .errors import NotAFixedPoint, TailNotDecaying
from .mather import EdgeMeasure, action
from .scheme import CostGraph

DEFAULT_EPS_TAIL = 1e-12


@dataclass(frozen=True)
class OccupationMeasure(EdgeMeasure):
    start: int = 0
    lam: float = 0.0
    steps: int = 0
    tail_mass_dropped: float = 0.0
    weight_sum: float = 0.0  # sum_k w_k before normalization
    lu0_integral: float = 0.0  # int L_u(., ., 0) dmu

    @property
    def normalization_identity(self) -> float:
        """lam * (sum_k tau w_k) * int L_u dmu; equals -1 up to the truncated tail."""
        return self.lam * self.graph.tau * self.weight_sum * self.lu0_integral


def occupation_measure(graph: CostGraph, u_lambda, lam: float, c: float, x: int,
                       eps_tail: float = DEFAULT_EPS_TAIL, tol: float = 1e-9) -> OccupationMeasure:
    """Laplace-type average of the backward trajectory of u^lam from node x."""
    if lam <= 0:
        raise ValueError("occupation measures need lambda > 0")
    u = np.asarray(u_lambda, dtype=float)
    pred, pred_edge, residual = policy(graph, u, lam, c)
    # calibration on every node the trajectory can visit
    node, seen = int(x) % graph.N, set()
    while node not in seen:
        if residual[node] > 10 * tol:
            raise NotAFixedPoint(f"calibration residual {residual[node]:.3e} at node {node} exceeds 10*tol")
        seen.add(node)
        node = int(pred[node])
    lu0 = graph.edge_lu0
    factor = 1.0 + graph.tau * lam * lu0[pred_edge]
    max_steps = int(np.ceil(1000.0 / (lam * graph.tau)))  # 1000/lam time units
    weights, steps, w_last, total = _kernels.trajectory_weights(
        pred, pred_edge, factor, int(x) % graph.N, eps_tail, max_steps, graph.n_edges
    )
    if w_last >= eps_tail:
        raise TailNotDecaying(
            f"weight still {w_last:.3e} after {steps} steps (1000/lambda time units); is L_u(., ., 0) < 0?"
        )
    B1, _ = graph.lu0_bounds
    tail = w_last / (graph.tau * lam * B1)  # bound on the dropped sum_{k >= K} w_k
    lu0_int = float(np.dot(weights, lu0)) / total
    return OccupationMeasure(
        graph, weights / total, start=int(x) % graph.N, lam=float(lam), steps=steps,
        tail_mass_dropped=tail / (total + tail), weight_sum=total, lu0_integral=lu0_int,
    )


def hull_projection(mu: EdgeMeasure, measures: Sequence[EdgeMeasure], sum_weight: float = 1e3):
    """Least-squares nearest point of conv(measures) to mu: ``(alpha, tv)``.

    alpha >= 0 solves an NNLS problem with an extra heavily weighted row enforcing
    sum(alpha) = 1; tv is half the L1 distance to the resulting combination.
    """
    M = np.array([m.weights for m in measures]).T  # [edge, k]
    A = np.vstack([M, sum_weight * np.ones((1, M.shape[1]))])
    b = np.concatenate([mu.weights, [sum_weight]])
    alpha, _ = nnls(A, b)
    s = alpha.sum()
    if s > 0:
        alpha = alpha / s
    tv = 0.5 * float(np.abs(mu.weights - M @ alpha).sum())
    return alpha, tv


@dataclass
class DiagnosticsRow:
    lam: float
    closedness_residual: float
    action_gap: float
    tv_to_mather_hull: float


@dataclass
class DiagnosticsTable:
    x: int
    rows: list[DiagnosticsRow]
    alphas: list[np.ndarray] = field(default_factory=list, repr=False)
    measures: list[OccupationMeasure] = field(default_factory=list, repr=False)
    non_monotone: list[str] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lambda", "closedness_residual", "action_gap", "tv_to_mather_hull"])
            for r in self.rows:
                w.writerow(["%.17g" % v for v in (r.lam, r.closedness_residual, r.action_gap,
                                                  r.tv_to_mather_hull)])


def weak_convergence_diagnostics(
    graph: CostGraph,
    c: float,
    mather_measures: Sequence[EdgeMeasure],
    x: int,
    lambdas: Sequence[float],
    solutions: Mapping[float, ValueFunction] | None = None,
    warm_start=None,
    eps_tail: float = DEFAULT_EPS_TAIL,
    tol: float = 1e-9,
    slack: float = 0.20,
    floor: float = 1e-10,
) -> DiagnosticsTable:
    """Closedness residual, action gap and TV distance to the Mather hull per lambda.

    Columns that fail to decrease (within ``slack``, ignoring values below
    ``floor``) are listed in ``non_monotone`` rather than raised: only
    subsequential convergence is guaranteed.
    """
    rows, alphas, occs = [], [], []
    start = warm_start
    for lam in lambdas:
        if solutions is not None and lam in solutions:
            u = solutions[lam]
        else:
            u = solve_discounted(graph, lam, c, tol=tol, u0=start)
        start = np.asarray(u, dtype=float)
        mu = occupation_measure(graph, u, lam, c, x, eps_tail=eps_tail, tol=tol)
        alpha, tv = hull_projection(mu, mather_measures)
        rows.append(DiagnosticsRow(float(lam), mu.closedness_residual, abs(action(mu) + c), tv))
        alphas.append(alpha)
        occs.append(mu)
    table = DiagnosticsTable(int(x), rows, alphas, occs)
    for name in ("closedness_residual", "action_gap", "tv_to_mather_hull"):
        col = table.column(name)
        for i in range(1, col.size):
            if col[i] > floor and col[i] > (1.0 + slack) * col[i - 1]:
                table.non_monotone.append(f"{name} rises at lambda={rows[i].lam:g}")
                break
    return table


@dataclass
class SelectionReport:
    values: list[float]
    tol: float

    @property
    def value(self) -> float:
        return min(self.values)

    @property
    def passed(self) -> bool:
        return self.value >= -self.tol


def check_selection_inequality(u_star, measures: Sequence[EdgeMeasure], lu0=None,
                               tol: float = 1e-8) -> SelectionReport:
    """min over measures of int L_u(., ., 0) u*(source) dmu; PASS iff >= -tol."""
    u = np.asarray(u_star, dtype=float)
    vals = []
    for mu in measures:
        g = mu.graph
        w = g.edge_lu0 if lu0 is None else np.asarray(lu0, dtype=float)
        vals.append(float(np.dot(mu.weights, w * u[g.edge_src])))
    return SelectionReport(vals, tol)
