"""Critical value, Mane potential, Aubry set and Peierls barrier on the cost graph.

All quantities live on reduced costs ``r = cost + tau c``:

* c is minus the minimum cycle mean of the edge costs, divided by tau (Karp);
* Phi(y, x) is the cheapest reduced-cost path y -> x with at least one edge,
  so Phi(y, y) is the cheapest cycle through y;
* the Aubry set is the set of nodes lying on a zero-reduced-cost cycle;
* h(y, x) = min_{z in A} Phi(y, z) + Phi(z, x).  On a finite graph the long-time
  minimal actions h_t(y, x) eventually only improve by looping on zero cycles,
  which all pass through A, so this is the liminf defining the barrier.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import _kernels
from .errors import EmptyAubry, NegativeCycle
from .scheme import CostGraph


def critical_value(graph: CostGraph) -> float:
    """c(G) = -(minimum mean edge cost over cycles) / tau."""
    mean, _ = _kernels.karp_min_mean(graph.cost_band, graph.src_band)
    return -mean / graph.tau + 0.0  # + 0.0 turns -0.0 into 0.0


def aubry_tolerance(graph: CostGraph) -> float:
    return 1e-8 * graph.N * graph.tau


def mane_potential(graph: CostGraph, c: float) -> np.ndarray:
    """All-pairs shortest reduced-cost paths (at least one edge)."""
    r_band = graph.reduced_band(c)
    phi, rounds, converged = _kernels.all_pairs_shortest(r_band, graph.src_band, graph.N + 1)
    if not converged:
        raise NegativeCycle(
            f"reduced costs at c={c:.17g} still improving after {rounds} rounds; c is below critical"
        )
    return phi


def _critical_structure(graph: CostGraph, c: float, phi: np.ndarray, tol: float):
    diag = np.diag(phi)
    z0 = int(np.argmin(diag))
    w = phi[z0].copy()  # critical subsolution: w(x) <= w(y) + r(y, x)
    r = graph.reduced_edges(c)
    shifted = r + w[graph.edge_src] - w[graph.edge_dst]
    critical = shifted <= tol
    N = graph.N
    src, dst = graph.edge_src[critical], graph.edge_dst[critical]
    adj = coo_matrix((np.ones(src.size), (src, dst)), shape=(N, N)).tocsr()
    n_comp, labels = connected_components(adj, directed=True, connection="strong")
    sizes = np.bincount(labels, minlength=n_comp)
    on_cycle = sizes[labels] > 1
    on_cycle[src[src == dst]] = True
    return w, shifted, critical, np.flatnonzero(on_cycle)


def aubry_set(graph: CostGraph, c: float, phi: np.ndarray | None = None) -> np.ndarray:
    """Nodes lying on a cycle of the critical subgraph (sorted indices)."""
    if phi is None:
        phi = mane_potential(graph, c)
    return _critical_structure(graph, c, phi, aubry_tolerance(graph))[3]


def peierls_barrier(phi: np.ndarray, A) -> np.ndarray:
    A = np.asarray(A, dtype=np.intp)
    if A.size == 0:
        raise EmptyAubry("Aubry set is empty; the level passed upstream is not critical")
    h = np.full_like(phi, np.inf)
    for z in A:
        np.minimum(h, phi[:, z][:, None] + phi[z, :][None, :], out=h)
    return h


@dataclass(frozen=True)
class BarrierData:
    c: float
    Phi: np.ndarray = field(repr=False)
    h: np.ndarray = field(repr=False)
    A: np.ndarray
    potential: np.ndarray = field(repr=False)
    shifted_costs: np.ndarray = field(repr=False)
    critical_edges: np.ndarray = field(repr=False)
    tol_A: float = 0.0

    @property
    def diagonal_aubry(self) -> np.ndarray:
        """{x : Phi(x, x) <= tol_A}; must coincide with ``A``."""
        return np.flatnonzero(np.diag(self.Phi) <= self.tol_A)

    def critical_solution(self, y0: int | None = None) -> np.ndarray:
        """h(y0, .) for an Aubry node y0 (the first one by default)."""
        return self.h[int(self.A[0]) if y0 is None else int(y0)]

    def to_csv(self, directory) -> None:
        os.makedirs(directory, exist_ok=True)
        with open(os.path.join(directory, "critical.json"), "w") as fh:
            json.dump({"c": float(self.c), "tol_A": self.tol_A, "A": [int(a) for a in self.A]},
                      fh, indent=2, sort_keys=True)
        for name, mat in (("phi.csv", self.Phi), ("barrier.csv", self.h)):
            np.savetxt(os.path.join(directory, name), mat, delimiter=",", fmt="%.17g")
        with open(os.path.join(directory, "aubry.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i"])
            for a in self.A:
                w.writerow([int(a)])


def compute_barrier(graph: CostGraph, c: float | None = None) -> BarrierData:
    if c is None:
        c = critical_value(graph)
    phi = mane_potential(graph, c)
    tol = aubry_tolerance(graph)
    w, shifted, critical, A = _critical_structure(graph, c, phi, tol)
    h = peierls_barrier(phi, A)
    return BarrierData(float(c), phi, h, A, w, shifted, critical, tol)
