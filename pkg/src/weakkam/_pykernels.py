"""Pure numpy implementations of the hot kernels.

Each function mirrors the compiled version in ``_ckernels.pyx`` operation by
operation (same summation order, same tie-breaking) so both backends return
bit-identical results on the built-in models.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

# relative slack below which a Bellman-Ford relaxation is not an improvement;
# keeps rounding-level cycles of zero reduced cost from looping forever
RELAX_EPS = 1e-14


def _discount_term(u, lam, tau, node_a, g_kind, g_poly):
    s = lam * u
    if g_kind == 1:
        g = np.expm1(s)
    else:
        acc = np.zeros_like(s)
        for c in g_poly[::-1]:
            acc = acc * s + c
        g = acc * s
    return tau * (node_a * g)


def apply_operator(phi, cost_band, src_band):
    """min_k phi[src_band[x, k]] + cost_band[x, k] for every arrival node x."""
    return (phi[src_band] + cost_band).min(axis=1)


def bellman_step(u, lam, tau, shift, cost_band, src_band, node_a, g_kind, g_poly):
    phi = u - _discount_term(u, lam, tau, node_a, g_kind, g_poly) if lam != 0.0 else u.copy()
    return apply_operator(phi, cost_band, src_band) + shift


def discounted_fixed_point(u0, lam, tau, shift, cost_band, src_band, node_a,
                           g_kind, g_poly, stop_tol, max_iter):
    """Jacobi value iteration until the sup-norm residual drops below ``stop_tol``.

    Returns ``(u, iterations, residual)``; ``residual`` is that of the last step.
    """
    u = np.array(u0, dtype=float, copy=True)
    residual = np.inf
    it = 0
    while it < max_iter:
        un = bellman_step(u, lam, tau, shift, cost_band, src_band, node_a, g_kind, g_poly)
        residual = float(np.max(np.abs(un - u)))
        u = un
        it += 1
        if residual < stop_tol:
            break
    return u, it, residual


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def karp_min_mean(cost_band, src_band):
    """Karp's minimum mean cycle on the banded graph, in double-double arithmetic.

    ``D_k(x)`` is the cheapest walk of exactly k edges ending at x from any
    start (``D_0 = 0``).  Returns ``(min mean, node attaining it)``.
    """
    N, K = cost_band.shape
    hi = np.zeros((N + 1, N))
    lo = np.zeros((N + 1, N))
    for k in range(N):
        a = hi[k][src_band]
        s, err = _two_sum(a, cost_band)
        lo_new = lo[k][src_band] + err
        t = s + lo_new
        j = np.argmin(t, axis=1)
        rows = np.arange(N)
        s_j, lo_j = s[rows, j], lo_new[rows, j]
        h = s_j + lo_j
        hi[k + 1] = h
        lo[k + 1] = lo_j - (h - s_j)
    dh = hi[N][None, :] - hi[:N]
    dl = lo[N][None, :] - lo[:N]
    lengths = (N - np.arange(N))[:, None].astype(float)
    ratios = (dh + dl) / lengths
    worst = ratios.max(axis=0)
    v = int(np.argmin(worst))
    return float(worst[v]), v


def all_pairs_shortest(r_band, src_band, max_rounds):
    """Phi[s, x]: cheapest path s -> x with at least one edge (Jacobi Bellman-Ford).

    Returns ``(Phi, rounds, converged)``.
    """
    N, K = r_band.shape
    phi = np.full((N, N), np.inf)
    for k in range(K):
        s = src_band[:, k]
        x = np.arange(N)
        phi[s, x] = np.minimum(phi[s, x], r_band[:, k])
    rounds = 0
    converged = False
    while rounds < max_rounds:
        rounds += 1
        cand = (phi[:, src_band] + r_band[None, :, :]).min(axis=2)
        improve = cand + RELAX_EPS * (1.0 + np.abs(cand)) < phi
        if not improve.any():
            converged = True
            break
        phi = np.where(improve, cand, phi)
    return phi, rounds, converged


def trajectory_weights(pred, pred_edge, step_factor, start, eps_tail, max_steps, n_edges):
    """Accumulate w_k = prod_{j<k} step_factor along the backward policy path.

    Edge k of the path goes pred(xi_k) -> xi_k and receives weight w_k.  Stops
    once w_k < eps_tail.  Returns ``(edge_weights, steps, w_final, total)``.
    """
    weights = np.zeros(n_edges)
    w = 1.0
    total = 0.0
    node = int(start)
    steps = 0
    pred = pred.tolist()
    pred_edge = pred_edge.tolist()
    factor = step_factor.tolist()
    acc = [0.0] * n_edges
    while w >= eps_tail and steps < max_steps:
        e = pred_edge[node]
        acc[e] += w
        total += w
        w *= factor[node]
        node = pred[node]
        steps += 1
    weights[:] = acc
    return weights, steps, w, total
