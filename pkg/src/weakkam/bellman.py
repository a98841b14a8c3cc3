"""Discrete Lax-Oleinik operator with nonlinear discount and its fixed points.

On the graph of :mod:`weakkam.scheme` the operator reads

    T[u](x) = min_y  u(y) + tau * L(y, v, lam * u(y)) + tau * c,    v = (x - y)_per / tau

and, for the separated models, ``L(y, v, lam u) = L_G(y, v) - a(y) g(lam u)``, so
T[u] = min_k phi[src] + cost_band + tau c with ``phi = u - tau a g(lam u)``.
The discount is evaluated at the departure node, which keeps T explicit,
monotone and a contraction of factor 1 - tau lam B1 as long as tau lam B < 1.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ContractionViolation, DiscountTooLarge, MaxIterExceeded, NotAFixedPoint
from .scheme import CostGraph, DiscreteScheme


@dataclass(frozen=True)
class ValueFunction:
    """Grid function on the nodes of ``scheme``; ``meta`` records how it was made."""

    values: np.ndarray
    scheme: DiscreteScheme
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.scheme.N,):
            raise ValueError(f"expected {self.scheme.N} values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("value function has non-finite entries")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size

    def __getitem__(self, i):
        return self.values[i]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def lipschitz(self) -> float:
        """max_i |u(x_{i+1}) - u(x_i)| * N, periodic."""
        return float(np.max(np.abs(np.roll(self.values, -1) - self.values)) * self.scheme.N)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "x_i", "u_i"])
            for i, (x, u) in enumerate(zip(self.scheme.positions, self.values)):
                w.writerow([i, "%.17g" % x, "%.17g" % u])

    @classmethod
    def from_csv(cls, path, scheme: DiscreteScheme) -> "ValueFunction":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 2], scheme)


def _values(u) -> np.ndarray:
    return np.ascontiguousarray(u.values if isinstance(u, ValueFunction) else u, dtype=float)


def check_contraction(graph: CostGraph, lam: float) -> None:
    _, B = graph.lu0_bounds
    if graph.tau * lam * B >= 1.0:
        raise ContractionViolation(f"tau*lambda*B = {graph.tau * lam * B:.4g} >= 1")


def _effective_b1(graph: CostGraph, lam: float, u: np.ndarray) -> float:
    # slope of u -> tau a g(lam u) near u, divided by tau lam; equals B1 for the linear family
    B1, _ = graph.lu0_bounds
    if lam == 0.0:
        return B1
    local = graph.node_a * graph.model.g_prime(lam * u)
    return float(min(B1, np.min(local)))


class LaxOleinik:
    """The operator T at fixed (lambda, c); construction checks tau lambda B < 1."""

    def __init__(self, graph: CostGraph, lam: float, c: float):
        if lam < 0:
            raise ValueError("lambda must be nonnegative")
        check_contraction(graph, lam)
        self.graph = graph
        self.lam = float(lam)
        self.c = float(c)
        model = graph.model
        self._args = (self.lam, graph.tau, graph.tau * self.c, graph.cost_band, graph.src_band,
                      graph.node_a, model.g_kind, np.ascontiguousarray(model.g_poly, dtype=float))

    def apply_raw(self, u: np.ndarray) -> np.ndarray:
        return _kernels.bellman_step(np.ascontiguousarray(u, dtype=float), *self._args)

    def __call__(self, u):
        vals = self.apply_raw(_values(u))
        return ValueFunction(vals, self.graph.scheme, {"lambda": self.lam, "c": self.c})

    def departure_values(self, u: np.ndarray) -> np.ndarray:
        """phi(y) = u(y) - tau a(y) g(lam u(y))."""
        u = np.asarray(u, dtype=float)
        if self.lam == 0.0:
            return u.copy()
        return u - self.graph.tau * (self.graph.node_a * self.graph.model.g(self.lam * u))

    def candidates(self, u: np.ndarray) -> np.ndarray:
        """[x, k] -> phi(src) + cost + tau c, the quantity minimized by T."""
        phi = self.departure_values(u)
        return phi[self.graph.src_band] + self.graph.cost_band + self.graph.tau * self.c


def lax_oleinik_step(graph: CostGraph, u, lam: float, c: float) -> ValueFunction:
    """One application of T; the input is not modified."""
    return LaxOleinik(graph, lam, c)(u)


def solve_discounted(
    graph: CostGraph,
    lam: float,
    c: float,
    tol: float = 1e-9,
    u0=None,
    alpha0: float | None = None,
    max_iter: int | None = None,
) -> ValueFunction:
    """Fixed point u^lam of T by Jacobi value iteration.

    Iterates until the residual is below ``tol * tau * lam * B1`` so that, by the
    contraction estimate, the distance to the true fixed point is below ``tol``.
    ``u0`` is a warm start (e.g. a critical solution); ``alpha0`` enables the
    DiscountTooLarge guard.
    """
    if lam <= 0:
        raise ValueError("solve_discounted needs lambda > 0")
    if alpha0 is not None and lam >= alpha0:
        raise DiscountTooLarge(f"lambda={lam} is not below alpha0={alpha0:.6g}")
    op = LaxOleinik(graph, lam, c)
    tau = graph.tau
    B1, _ = graph.lu0_bounds
    if max_iter is None:
        max_iter = int(60.0 / (tau * lam * B1)) + 1000
    u = np.zeros(graph.N) if u0 is None else _values(u0).copy()
    total = 0
    b1 = _effective_b1(graph, lam, u)
    while True:
        stop = tol * tau * lam * b1
        u, it, residual = _kernels.discounted_fixed_point(u, *op._args, stop, max_iter - total)
        total += it
        if residual >= stop:
            raise MaxIterExceeded("value iteration did not reach the stopping residual", residual, total)
        # the local contraction rate depends on u through g'(lam u); re-check it
        b1_new = _effective_b1(graph, lam, u)
        if b1_new >= b1 or residual < tol * tau * lam * b1_new:
            break
        b1 = b1_new
    meta = {
        "lambda": float(lam), "c": float(c), "tol": float(tol), "iterations": total,
        "residual": float(residual), "error_bound": float(residual / (tau * lam * b1)),
        "backend": _kernels.BACKEND,
    }
    return ValueFunction(u, graph.scheme, meta)


def policy(graph: CostGraph, u, lam: float, c: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Backward minimizer at every node: ``(pred, pred_edge, residual)``.

    pred[x] is the departure node y attaining T[u](x), smallest index among
    exact ties; residual[x] = |u(x) - T[u](x)| is the calibration defect.
    """
    op = LaxOleinik(graph, lam, c)
    u = _values(u)
    cand = op.candidates(u)
    best = cand.min(axis=1)
    src = graph.src_band
    tied = np.where(cand == best[:, None], src, graph.N)
    pred = tied.min(axis=1)
    k = np.argmax(tied == pred[:, None], axis=1)
    rows = np.arange(graph.N)
    pred_edge = graph.band_edge[rows, k]
    return pred.astype(np.intp), pred_edge.astype(np.intp), np.abs(u - best)


def extract_trajectory(graph: CostGraph, u, lam: float, c: float, x: int, K: int,
                       tol: float = 1e-9) -> np.ndarray:
    """Backward minimizing path xi_0 = x, xi_1, ..., xi_K.

    Raises NotAFixedPoint if the calibration identity
    u(xi_k) = u(xi_{k+1}) + tau L(xi_{k+1}, v_k, lam u(xi_{k+1})) + tau c fails by
    more than ``10 tol`` on any step.
    """
    pred, _, residual = policy(graph, u, lam, c)
    path = np.empty(K + 1, dtype=np.intp)
    path[0] = int(x) % graph.N
    for k in range(K):
        node = path[k]
        if residual[node] > 10 * tol:
            raise NotAFixedPoint(
                f"calibration residual {residual[node]:.3e} at node {node} exceeds 10*tol"
            )
        path[k + 1] = pred[node]
    return path
