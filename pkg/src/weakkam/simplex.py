"""Self-contained dense two-phase simplex for  min c.x  s.t.  A x = b,  x >= 0.

Two pivoting rules are available:

* ``"bland"``: smallest eligible index enters, smallest basic index leaves among
  ratio ties.  Cycle-free, but on the highly degenerate flow LPs of this
  package it can stall for tens of thousands of pivots.
* ``"lex"`` (default): most negative reduced cost enters, and ratio ties are
  broken by the lexicographic rule on the rows of B^{-1}.  Lexicographic
  ratio tests also rule out cycling, whatever the entering rule.

The artificial columns are kept in the tableau through phase 2 (never allowed
to enter) because they hold B^{-1} for the lexicographic test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LPInfeasible, LPUnbounded

PIVOT_TOL = 1e-10


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    value: float
    basis: np.ndarray
    iterations: int


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    colv = T[:, col].copy()
    colv[row] = 0.0
    rows = np.flatnonzero(colv)  # flow tableaux stay sparse; skip untouched rows
    T[rows] -= np.outer(colv[rows], T[row])


def _leaving_row(T, basis, col, m, lex: slice | None, tol: float) -> int:
    column = T[:m, col]
    pos = np.flatnonzero(column > tol)
    if pos.size == 0:
        raise LPUnbounded(f"column {col} has no positive entry")
    ratios = T[pos, -1] / column[pos]
    rmin = ratios.min()
    ties = pos[ratios <= rmin + tol * max(1.0, abs(rmin))]
    if ties.size > 1 and lex is not None:
        for j in range(lex.start, lex.stop):
            vals = T[ties, j] / column[ties]
            vmin = vals.min()
            ties = ties[vals <= vmin + tol * max(1.0, abs(vmin))]
            if ties.size == 1:
                break
    return int(ties[np.argmin(basis[ties])])


def _run(T: np.ndarray, basis: np.ndarray, n_cols: int, tol: float, max_iter: int,
         rule: str, lex: slice) -> int:
    """Simplex iterations on tableau T (objective row last).  Returns pivots made."""
    m = T.shape[0] - 1
    it = 0
    while True:
        red = T[-1, :n_cols]
        eligible = np.flatnonzero(red < -tol)
        if eligible.size == 0:
            return it
        if rule == "bland":
            col = int(eligible[0])
            row = _leaving_row(T, basis, col, m, None, tol)
        else:
            col = int(eligible[np.argmin(red[eligible])])
            row = _leaving_row(T, basis, col, m, lex, tol)
        _pivot(T, row, col)
        basis[row] = col
        it += 1
        if it >= max_iter:
            raise RuntimeError(f"simplex exceeded {max_iter} pivots")


def solve_lp(c, A_eq, b_eq, tol: float = PIVOT_TOL, max_iter: int = 100_000,
             rule: str = "lex") -> LPResult:
    """Minimize c.x subject to A_eq x = b_eq, x >= 0.

    Raises LPInfeasible or LPUnbounded.  Redundant equality rows are detected
    after phase 1 and dropped.
    """
    if rule not in ("lex", "bland"):
        raise ValueError(f"unknown pivoting rule {rule!r}")
    c = np.asarray(c, dtype=float)
    A = np.array(A_eq, dtype=float, ndmin=2)
    b = np.array(b_eq, dtype=float).reshape(-1)
    m, n = A.shape
    if c.shape != (n,) or b.shape != (m,):
        raise ValueError("inconsistent LP dimensions")
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0
    lex = slice(n, n + m)

    # phase 1: artificial columns n..n+m-1, minimize their sum
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = np.arange(n, n + m)
    it = _run(T, basis, n + m, tol, max_iter, rule, lex)
    scale = max(1.0, float(np.abs(b).max()) if m else 1.0)
    if -T[-1, -1] > 1e3 * tol * scale:
        raise LPInfeasible(f"phase-1 optimum {-T[-1, -1]:.3e} > 0")

    # drive remaining artificials out of the basis, dropping redundant rows
    keep = np.ones(m, dtype=bool)
    for row in range(m):
        if basis[row] < n:
            continue
        cand = np.flatnonzero(np.abs(T[row, :n]) > tol)
        if cand.size:
            _pivot(T, row, int(cand[0]))
            basis[row] = int(cand[0])
            it += 1
        else:
            keep[row] = False
    T = np.vstack([T[:m][keep], T[-1:]])
    basis = basis[keep]
    mk = basis.size

    # phase 2 objective row: reduced costs of c with respect to the basis
    T[-1, :] = 0.0
    T[-1, :n] = c
    for row in range(mk):
        cb = c[basis[row]]
        if cb != 0.0:
            T[-1] -= cb * T[row]
    it += _run(T, basis, n, tol, max_iter, rule, lex)
    x = np.zeros(n)
    x[basis] = np.maximum(T[:mk, -1], 0.0)
    return LPResult(x=x, value=float(c @ x), basis=basis.copy(), iterations=it)
