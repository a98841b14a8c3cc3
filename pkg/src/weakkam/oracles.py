"""Deliberately naive reference computations for small grids.

Nothing here calls the kernels or the production graph code: costs are rebuilt
from the model with explicit loops over node pairs, so agreement with the fast
paths is a genuine cross-check.  Intended for N <= 32.
"""

from __future__ import annotations

import math

import numpy as np

from .model import HamiltonianModel


def node_position(i: int, N: int) -> float:
    return i / N if 2 * i <= N else (i - N) / N


def displacement(y: int, x: int, N: int) -> int:
    """Signed number of grid steps from y to x, in (-N/2, N/2]."""
    d = (x - y) % N
    return d - N if 2 * d > N else d


def cost_matrix(model: HamiltonianModel, N: int, tau: float, W: int) -> np.ndarray:
    """C[y, x] = tau L_G(y, v) for |move| <= W, +inf otherwise."""
    C = np.full((N, N), math.inf)
    for y in range(N):
        py = node_position(y, N)
        Vy = float(model.V(py))
        for x in range(N):
            d = displacement(y, x, N)
            if abs(d) <= W:
                v = d / (N * tau)
                C[y, x] = tau * (0.5 * v * v - Vy)
    return C


def discounted_fixed_point(model: HamiltonianModel, N: int, tau: float, W: int, lam: float, c: float,
                           tol: float = 1e-14, max_iter: int = 10_000_000) -> np.ndarray:
    """Explicit scheme u(x) = min_y u(y) - tau a(y) g(lam u(y)) + C[y, x] + tau c, node by node."""
    C = cost_matrix(model, N, tau, W)
    a = [float(model.a(node_position(y, N))) for y in range(N)]
    u = [0.0] * N
    for _ in range(max_iter):
        phi = [u[y] - tau * a[y] * float(model.g(lam * u[y])) for y in range(N)]
        new = [min(phi[y] + C[y, x] + tau * c for y in range(N) if C[y, x] < math.inf) for x in range(N)]
        diff = max(abs(p - q) for p, q in zip(new, u))
        u = new
        if diff < tol:
            break
    return np.array(u)


def implicit_fixed_point(model: HamiltonianModel, N: int, tau: float, W: int, lam: float, c: float,
                         tol: float = 1e-13, max_iter: int = 10_000_000) -> np.ndarray:
    """Arrival-point variant: w = min_y u(y) + tau L(y, v, lam w) + tau c, by bisection per node.

    F(w) = w - min_y [...] is strictly increasing in w because L is strictly
    decreasing in its last argument.
    """
    C = cost_matrix(model, N, tau, W)
    a = [float(model.a(node_position(y, N))) for y in range(N)]
    preds = [[y for y in range(N) if C[y, x] < math.inf] for x in range(N)]
    u = [0.0] * N
    for _ in range(max_iter):
        new = []
        for x in range(N):
            def F(w):
                gw = float(model.g(lam * w))
                return w - min(u[y] + C[y, x] - tau * a[y] * gw + tau * c for y in preds[x])
            lo, hi = -1.0, 1.0
            while F(lo) > 0:
                lo *= 2
            while F(hi) < 0:
                hi *= 2
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if F(mid) < 0:
                    lo = mid
                else:
                    hi = mid
                if hi - lo < 1e-15 * max(1.0, abs(mid)):
                    break
            new.append(0.5 * (lo + hi))
        diff = max(abs(p - q) for p, q in zip(new, u))
        u = new
        if diff < tol:
            break
    return np.array(u)


def _minplus(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.min(A[:, :, None] + B[None, :, :], axis=1)


def min_mean_cycle_by_powers(C: np.ndarray) -> float:
    """min over k <= N and x of (C^k)[x, x] / k in the min-plus algebra."""
    N = C.shape[0]
    P = C.copy()
    best = math.inf
    for k in range(1, N + 1):
        best = min(best, float(np.min(np.diag(P))) / k)
        P = _minplus(P, C)
    return best


def liminf_barrier(C: np.ndarray, tau: float, c: float, horizon: int = 2000, window: int = 200) -> np.ndarray:
    """min over t in [horizon - window, horizon] of h_t(y, x), h_t = t-step min reduced action."""
    R = C + tau * c
    H = R.copy()
    best = np.full_like(R, math.inf)
    for t in range(1, horizon + 1):
        if t >= horizon - window:
            best = np.minimum(best, H)
        if t < horizon:
            H = _minplus(H, R)
    return best


def simple_cycles(C: np.ndarray):
    """All simple cycles of the finite-cost graph, each listed once from its smallest node."""
    N = C.shape[0]
    succ = [[x for x in range(N) if C[y, x] < math.inf] for y in range(N)]
    for s in range(N):
        stack = [(s, iter(succ[s]))]
        path, on_path = [s], {s}
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                on_path.discard(path.pop())
                continue
            if nxt == s:
                yield list(path)
            elif nxt > s and nxt not in on_path:
                path.append(nxt)
                on_path.add(nxt)
                stack.append((nxt, iter(succ[nxt])))


def mather_vertices(C: np.ndarray, rel_tol: float = 1e-12):
    """Minimum mean cost and the simple cycles attaining it.

    The vertices of the polytope of closed probability edge measures are the
    uniform measures on simple cycles, so this enumerates the optimal vertices
    of the Mather LP.
    """
    best, found = math.inf, []
    for cyc in simple_cycles(C):
        L = len(cyc)
        mean = sum(C[cyc[i], cyc[(i + 1) % L]] for i in range(L)) / L
        if not found or mean < best - rel_tol * max(1.0, abs(best)):
            best, found = mean, [tuple(cyc)]
        elif abs(mean - best) <= rel_tol * max(1.0, abs(best)):
            found.append(tuple(cyc))
    found.sort(key=lambda cyc: (min(cyc), len(cyc), cyc))
    return best, found
