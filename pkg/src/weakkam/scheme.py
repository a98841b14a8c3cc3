"""Periodic grid, time step and velocity window, and the induced transition graph."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .model import HamiltonianModel


def periodic_displacement(dx):
    """Minimal displacement on the unit circle, in (-1/2, 1/2] (ties at 1/2 go to +1/2)."""
    dx = np.asarray(dx, dtype=float)
    out = dx - np.floor(dx)  # [0, 1)
    out = np.where(out > 0.5, out - 1.0, out)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class DiscreteScheme:
    """N grid points x_i = i/N, time step tau and moves j - i in [-W, W] (mod N)."""

    N: int
    tau: float | None = None
    W: int = 8

    def __post_init__(self):
        if self.N < 8:
            raise ValueError("N must be at least 8")
        if self.W < 1:
            raise ValueError("W must be at least 1")
        if 2 * self.W + 1 > self.N:
            raise ValueError("velocity window 2W+1 must not exceed N (moves would alias)")
        tau = 1.0 / self.N if self.tau is None else float(self.tau)
        if tau <= 0:
            raise ValueError("tau must be positive")
        object.__setattr__(self, "tau", tau)

    @property
    def K(self) -> int:
        return 2 * self.W + 1

    @cached_property
    def moves(self) -> np.ndarray:
        return np.arange(-self.W, self.W + 1)

    @cached_property
    def velocities(self) -> np.ndarray:
        return self.moves / (self.N * self.tau)

    @property
    def max_speed(self) -> float:
        return self.W / (self.N * self.tau)

    @cached_property
    def positions(self) -> np.ndarray:
        return np.arange(self.N) / self.N

    @cached_property
    def centered_positions(self) -> np.ndarray:
        # i/N for i <= N/2, -(N-i)/N above; exact mirror symmetry about 0
        i = np.arange(self.N)
        return np.where(2 * i > self.N, i - self.N, i) / self.N

    @cached_property
    def src_band(self) -> np.ndarray:
        """src_band[x, k]: departure node of the move ``moves[k]`` arriving at x."""
        x = np.arange(self.N)[:, None]
        return np.ascontiguousarray((x - self.moves[None, :]) % self.N, dtype=np.intp)

    def node_of(self, x: float) -> int:
        return int(round(float(x) * self.N)) % self.N

    def graph_distance(self, i, j):
        d = np.abs(np.asarray(i) - np.asarray(j)) % self.N
        return np.minimum(d, self.N - d)


@dataclass(frozen=True)
class CostGraph:
    """Edges y -> x with cost tau * L_G(y, v), v = (x - y)_per / tau.

    Costs are held twice: ``cost_band[x, k]`` indexed by arrival node (used by
    the Bellman and Karp kernels) and ``edge_cost[e]`` over the edge list
    ``e = y * K + k`` (used by measures and linear programs).
    """

    model: HamiltonianModel
    scheme: DiscreteScheme
    cost_band: np.ndarray = field(repr=False)
    edge_src: np.ndarray = field(repr=False)
    edge_dst: np.ndarray = field(repr=False)
    edge_move: np.ndarray = field(repr=False)
    edge_cost: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return self.scheme.N

    @property
    def n_edges(self) -> int:
        return self.edge_src.size

    @property
    def tau(self) -> float:
        return self.scheme.tau

    @property
    def src_band(self) -> np.ndarray:
        return self.scheme.src_band

    @cached_property
    def band_edge(self) -> np.ndarray:
        """Edge index of band entry (x, k)."""
        K = self.scheme.K
        return self.src_band * K + np.arange(K)[None, :]

    @cached_property
    def edge_velocity(self) -> np.ndarray:
        return self.scheme.velocities[self.edge_move]

    @cached_property
    def edge_lu0(self) -> np.ndarray:
        """L_u(y, v, 0) on every edge (evaluated at the departure node)."""
        y = self.scheme.centered_positions[self.edge_src]
        return np.broadcast_to(self.model.lagrangian_u0(y, self.edge_velocity), (self.n_edges,)).astype(float)

    @cached_property
    def node_a(self) -> np.ndarray:
        return np.ascontiguousarray(
            np.broadcast_to(self.model.a(self.scheme.centered_positions), (self.N,)), dtype=float
        )

    @cached_property
    def lu0_bounds(self) -> tuple[float, float]:
        """(B1, B) = (min, max) of |L_u(., ., 0)| over the edge set."""
        mag = np.abs(self.edge_lu0)
        return float(mag.min()), float(mag.max())

    def edge_index(self, src: int, dst: int) -> int:
        k = (dst - src) % self.N
        if k > self.N // 2:
            k -= self.N
        if abs(k) > self.scheme.W:
            raise KeyError(f"no edge {src} -> {dst}")
        return src * self.scheme.K + (k + self.scheme.W)

    def reduced_band(self, c: float) -> np.ndarray:
        return self.cost_band + self.tau * c

    def reduced_edges(self, c: float) -> np.ndarray:
        return self.edge_cost + self.tau * c

    def shifted(self, k: float) -> "CostGraph":
        """Same graph with ``k`` added to every edge cost (test helper)."""
        return CostGraph(self.model, self.scheme, self.cost_band + k, self.edge_src,
                         self.edge_dst, self.edge_move, self.edge_cost + k)


def build_graph(model: HamiltonianModel, scheme: DiscreteScheme) -> CostGraph:
    N, K = scheme.N, scheme.K
    y = scheme.centered_positions
    v = scheme.velocities
    # L_G depends on the departure node y only through V(y) and a(y) g(0) = 0
    lag = scheme.tau * model.lagrangian(y[:, None], v[None, :], 0.0)  # [y, k]
    edge_src = np.repeat(np.arange(N), K)
    edge_move = np.tile(np.arange(K), N)
    edge_dst = (edge_src + scheme.moves[edge_move]) % N
    edge_cost = np.ascontiguousarray(lag.reshape(-1))
    cost_band = np.ascontiguousarray(lag[scheme.src_band, np.arange(K)[None, :]])
    return CostGraph(model, scheme, cost_band, edge_src, edge_dst, edge_move, edge_cost)
