# cython: language_level=3
"""Compiled hot kernels; semantics mirror ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport expm1, fabs, INFINITY

cnp.import_array()

BACKEND = "cython"
DEF _RELAX_EPS = 1e-14
RELAX_EPS = _RELAX_EPS


cdef inline double _g(double s, int g_kind, const double[::1] g_poly) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t i
    if g_kind == 1:
        return expm1(s)
    for i in range(g_poly.shape[0] - 1, -1, -1):
        acc = acc * s + g_poly[i]
    return acc * s


cdef void _step(const double[::1] u, double[::1] phi, double[::1] out, double lam, double tau,
                double shift, const double[:, ::1] cost, const Py_ssize_t[:, ::1] src,
                const double[::1] node_a, int g_kind, const double[::1] g_poly) noexcept nogil:
    cdef Py_ssize_t N = cost.shape[0], K = cost.shape[1], x, k
    cdef double best, t
    for x in range(N):
        if lam != 0.0:
            phi[x] = u[x] - tau * (node_a[x] * _g(lam * u[x], g_kind, g_poly))
        else:
            phi[x] = u[x]
    for x in range(N):
        best = phi[src[x, 0]] + cost[x, 0]
        for k in range(1, K):
            t = phi[src[x, k]] + cost[x, k]
            if t < best:
                best = t
        out[x] = best + shift


def apply_operator(phi, cost_band, src_band):
    cdef const double[::1] p = np.ascontiguousarray(phi, dtype=float)
    cdef const double[:, ::1] cost = np.ascontiguousarray(cost_band, dtype=float)
    cdef const Py_ssize_t[:, ::1] src = np.ascontiguousarray(src_band, dtype=np.intp)
    cdef Py_ssize_t N = cost.shape[0], K = cost.shape[1], x, k
    out = np.empty(N)
    cdef double[::1] o = out
    cdef double best, t
    with nogil:
        for x in range(N):
            best = p[src[x, 0]] + cost[x, 0]
            for k in range(1, K):
                t = p[src[x, k]] + cost[x, k]
                if t < best:
                    best = t
            o[x] = best
    return out


def bellman_step(u, double lam, double tau, double shift, cost_band, src_band, node_a,
                 int g_kind, g_poly):
    cdef const double[::1] uu = np.ascontiguousarray(u, dtype=float)
    cdef Py_ssize_t N = uu.shape[0]
    phi = np.empty(N)
    out = np.empty(N)
    _step(uu, phi, out, lam, tau, shift,
          np.ascontiguousarray(cost_band, dtype=float),
          np.ascontiguousarray(src_band, dtype=np.intp),
          np.ascontiguousarray(node_a, dtype=float), g_kind,
          np.ascontiguousarray(g_poly, dtype=float))
    return out


def discounted_fixed_point(u0, double lam, double tau, double shift, cost_band, src_band,
                           node_a, int g_kind, g_poly, double stop_tol, long max_iter):
    cdef const double[:, ::1] cost = np.ascontiguousarray(cost_band, dtype=float)
    cdef const Py_ssize_t[:, ::1] src = np.ascontiguousarray(src_band, dtype=np.intp)
    cdef const double[::1] a = np.ascontiguousarray(node_a, dtype=float)
    cdef const double[::1] gp = np.ascontiguousarray(g_poly, dtype=float)
    cdef Py_ssize_t N = cost.shape[0], x
    u_arr = np.array(u0, dtype=float, copy=True)
    un_arr = np.empty(N)
    phi_arr = np.empty(N)
    cdef double[::1] u = u_arr
    cdef double[::1] un = un_arr
    cdef double[::1] phi = phi_arr
    cdef double[::1] tmp
    cdef double residual = INFINITY, d
    cdef long it = 0
    with nogil:
        while it < max_iter:
            _step(u, phi, un, lam, tau, shift, cost, src, a, g_kind, gp)
            residual = 0.0
            for x in range(N):
                d = fabs(un[x] - u[x])
                if d > residual:
                    residual = d
            tmp = u
            u = un
            un = tmp
            it += 1
            if residual < stop_tol:
                break
    return np.asarray(u).copy(), int(it), float(residual)


def karp_min_mean(cost_band, src_band):
    cdef const double[:, ::1] cost = np.ascontiguousarray(cost_band, dtype=float)
    cdef const Py_ssize_t[:, ::1] src = np.ascontiguousarray(src_band, dtype=np.intp)
    cdef Py_ssize_t N = cost.shape[0], K = cost.shape[1], x, k, j, y, v
    hi_arr = np.zeros((N + 1, N))
    lo_arr = np.zeros((N + 1, N))
    cdef double[:, ::1] hi = hi_arr
    cdef double[:, ::1] lo = lo_arr
    cdef double a, b, s, bb, err, lo_new, t, best_t, best_s, best_lo, h
    cdef double worst, ratio, best_mean = INFINITY
    cdef Py_ssize_t best_v = 0
    with nogil:
        for k in range(N):
            for x in range(N):
                best_t = INFINITY
                best_s = 0.0
                best_lo = 0.0
                for j in range(K):
                    y = src[x, j]
                    a = hi[k, y]
                    b = cost[x, j]
                    s = a + b
                    bb = s - a
                    err = (a - (s - bb)) + (b - bb)
                    lo_new = lo[k, y] + err
                    t = s + lo_new
                    if t < best_t:
                        best_t = t
                        best_s = s
                        best_lo = lo_new
                h = best_s + best_lo
                hi[k + 1, x] = h
                lo[k + 1, x] = best_lo - (h - best_s)
        for v in range(N):
            worst = -INFINITY
            for k in range(N):
                ratio = ((hi[N, v] - hi[k, v]) + (lo[N, v] - lo[k, v])) / <double>(N - k)
                if ratio > worst:
                    worst = ratio
            if worst < best_mean:
                best_mean = worst
                best_v = v
    return float(best_mean), int(best_v)


def all_pairs_shortest(r_band, src_band, long max_rounds):
    cdef const double[:, ::1] r = np.ascontiguousarray(r_band, dtype=float)
    cdef const Py_ssize_t[:, ::1] src = np.ascontiguousarray(src_band, dtype=np.intp)
    cdef Py_ssize_t N = r.shape[0], K = r.shape[1], s, x, k
    phi_arr = np.full((N, N), np.inf)
    new_arr = np.empty((N, N))
    cdef double[:, ::1] phi = phi_arr
    cdef double[:, ::1] new = new_arr
    cdef double[:, ::1] tmp
    cdef double cand, t
    cdef long rounds = 0
    cdef bint converged = False, changed
    for k in range(K):
        for x in range(N):
            s = src[x, k]
            if r[x, k] < phi[s, x]:
                phi[s, x] = r[x, k]
    with nogil:
        while rounds < max_rounds:
            rounds += 1
            changed = False
            for s in range(N):
                for x in range(N):
                    cand = phi[s, src[x, 0]] + r[x, 0]
                    for k in range(1, K):
                        t = phi[s, src[x, k]] + r[x, k]
                        if t < cand:
                            cand = t
                    if cand + _RELAX_EPS * (1.0 + fabs(cand)) < phi[s, x]:
                        new[s, x] = cand
                        changed = True
                    else:
                        new[s, x] = phi[s, x]
            if not changed:
                converged = True
                break
            tmp = phi
            phi = new
            new = tmp
    return np.asarray(phi).copy(), int(rounds), bool(converged)


def trajectory_weights(pred, pred_edge, step_factor, Py_ssize_t start, double eps_tail,
                       long max_steps, Py_ssize_t n_edges):
    cdef const Py_ssize_t[::1] pr = np.ascontiguousarray(pred, dtype=np.intp)
    cdef const Py_ssize_t[::1] pe = np.ascontiguousarray(pred_edge, dtype=np.intp)
    cdef const double[::1] f = np.ascontiguousarray(step_factor, dtype=float)
    weights = np.zeros(n_edges)
    cdef double[::1] acc = weights
    cdef double w = 1.0, total = 0.0
    cdef Py_ssize_t node = start
    cdef long steps = 0
    with nogil:
        while w >= eps_tail and steps < max_steps:
            acc[pe[node]] += w
            total += w
            w *= f[node]
            node = pr[node]
            steps += 1
    return weights, int(steps), float(w), float(total)
