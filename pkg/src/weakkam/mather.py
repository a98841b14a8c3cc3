"""Closed edge measures, extreme Mather measures and the LP certificate.

A probability on the edges of the cost graph is *closed* when every node has
equal inflow and outflow (the discrete form of  int <D phi, v> d mu = 0).  Its
action is  sum_e mu_e L_G(e)  with  L_G(e) = cost_e / tau, and the minimum over
closed measures is -c.  The minimizers form the convex hull of the uniform
measures on the simple cycles of the critical subgraph.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from itertools import islice
from typing import Callable

import networkx as nx
import numpy as np

from .critical import BarrierData, compute_barrier
from .errors import CycleExplosion
from .scheme import CostGraph
from .simplex import solve_lp

PROB_TOL = 1e-12
CLOSED_TOL = 1e-10
DEFAULT_CYCLE_CAP = 10_000


@dataclass(frozen=True)
class EdgeMeasure:
    """Nonnegative weights over the edge list of ``graph``."""

    graph: CostGraph = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.shape != (self.graph.n_edges,):
            raise ValueError(f"expected {self.graph.n_edges} edge weights, got {w.shape}")
        if np.any(w < 0):
            raise ValueError("edge weights must be nonnegative")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def node_balance(self) -> np.ndarray:
        """inflow(x) - outflow(x)."""
        N = self.graph.N
        inflow = np.bincount(self.graph.edge_dst, weights=self.weights, minlength=N)
        outflow = np.bincount(self.graph.edge_src, weights=self.weights, minlength=N)
        return inflow - outflow

    @property
    def closedness_residual(self) -> float:
        return float(np.max(np.abs(self.node_balance())))

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)

    @property
    def max_speed(self) -> float:
        s = self.support
        return float(np.max(np.abs(self.graph.edge_velocity[s]))) if s.size else 0.0

    def node_mass(self) -> np.ndarray:
        """Projection onto departure nodes."""
        return np.bincount(self.graph.edge_src, weights=self.weights, minlength=self.graph.N)

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "weight"])
            for e in self.support:
                w.writerow([int(self.graph.edge_src[e]), int(self.graph.edge_dst[e]),
                            "%.17g" % self.weights[e]])


@dataclass(frozen=True)
class ClosedMeasure(EdgeMeasure):
    """Flow-conserving probability on edges; validated at construction."""

    cycle: tuple[int, ...] = ()

    def __post_init__(self):
        super().__post_init__()
        if abs(self.total - 1.0) > PROB_TOL:
            raise ValueError(f"weights sum to {self.total!r}, not 1")
        if self.closedness_residual > CLOSED_TOL:
            raise ValueError(f"measure is not closed (imbalance {self.closedness_residual:.3e})")


def lagrangian_weights(graph: CostGraph) -> np.ndarray:
    """L_G on every edge, per unit time."""
    return graph.edge_cost / graph.tau


def action(mu: EdgeMeasure, weight_fn: Callable[[CostGraph], np.ndarray] | np.ndarray | None = None) -> float:
    """sum_e mu_e f(e); ``f`` defaults to L_G (so Mather measures give -c)."""
    if weight_fn is None:
        f = lagrangian_weights(mu.graph)
    elif callable(weight_fn):
        f = weight_fn(mu.graph)
    else:
        f = weight_fn
    return mu.integrate(f)


def cycle_measure(graph: CostGraph, cycle) -> ClosedMeasure:
    """Uniform-in-time measure on a closed walk given as its node sequence."""
    w = np.zeros(graph.n_edges)
    L = len(cycle)
    for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]]):
        w[graph.edge_index(int(a), int(b))] += 1.0 / L
    return ClosedMeasure(graph, w, cycle=tuple(int(v) for v in cycle))


def _canonical(cycle) -> tuple[int, ...]:
    i = int(np.argmin(cycle))
    return tuple(int(v) for v in list(cycle[i:]) + list(cycle[:i]))


def critical_cycles(graph: CostGraph, barrier: BarrierData, cap: int = DEFAULT_CYCLE_CAP):
    """Simple cycles of the critical subgraph in canonical order (Johnson's algorithm)."""
    G = nx.DiGraph()
    crit = np.flatnonzero(barrier.critical_edges)
    G.add_edges_from(zip(graph.edge_src[crit].tolist(), graph.edge_dst[crit].tolist()))
    found = list(islice(nx.simple_cycles(G), cap + 1))
    if len(found) > cap:
        raise CycleExplosion(len(found), cap)
    cycles = [_canonical(c) for c in found]
    cycles.sort(key=lambda cyc: (min(cyc), len(cyc), cyc))
    return cycles


def extreme_mather_measures(graph: CostGraph, c: float | None = None, barrier: BarrierData | None = None,
                            cap: int = DEFAULT_CYCLE_CAP) -> list[ClosedMeasure]:
    """Extreme points of the set of discrete Mather measures.

    Raises CycleExplosion when the critical subgraph has more than ``cap`` simple
    cycles; :func:`mather_lp_certificate` still works in that case.
    """
    if barrier is None:
        barrier = compute_barrier(graph, c)
    return [cycle_measure(graph, cyc) for cyc in critical_cycles(graph, barrier, cap)]


def mather_lp_certificate(graph: CostGraph) -> tuple[float, ClosedMeasure]:
    """min sum_e cost_e mu_e over closed probability measures, by dense simplex.

    Returns (value, minimizer); ``value / tau`` equals ``-c``.
    """
    N, E = graph.N, graph.n_edges
    A = np.zeros((N + 1, E))
    cols = np.arange(E)
    A[graph.edge_dst, cols] += 1.0
    A[graph.edge_src, cols] -= 1.0
    A[N, :] = 1.0
    b = np.zeros(N + 1)
    b[N] = 1.0
    res = solve_lp(graph.edge_cost, A, b)
    w = res.x / res.x.sum()
    return res.value, ClosedMeasure(graph, w)
