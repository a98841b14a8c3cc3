"""Continuum closed forms for the mechanical models p^2/2 + V(x) on the circle.

For G = p^2/2 + V the critical value is max V, the projected Aubry set is the set
of maximizers of V, and for an Aubry point y the barrier h(y, .) is the
Maupertuis length  min(int_y^x, int_x^{y+1}) sqrt(2 (c - V(s))) ds.  When the
maximizers are isolated every Mather measure is a combination of rest points,
so the selected limit is u^0 = min_{y in A} h(y, .).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from .model import HamiltonianModel


@dataclass(frozen=True)
class MechanicalReference:
    c: float
    aubry: tuple[float, ...]  # empty when V is constant (every point is Aubry)

    @property
    def degenerate(self) -> bool:
        return not self.aubry

    def barrier(self, model: HamiltonianModel, y: float, xs) -> np.ndarray:
        if self.degenerate:
            return np.zeros(np.shape(xs))
        speed = lambda s: np.sqrt(max(2.0 * (self.c - float(model.V(s))), 0.0))
        out = []
        for x in np.atleast_1d(xs):
            d = (float(x) - y) % 1.0
            fwd = quad(speed, y, y + d, limit=200, epsabs=1e-13, epsrel=1e-12)[0] if d > 0 else 0.0
            bwd = quad(speed, y + d, y + 1.0, limit=200, epsabs=1e-13, epsrel=1e-12)[0] if d > 0 else 0.0
            out.append(min(fwd, bwd) if d > 0 else 0.0)
        return np.array(out)

    def limit(self, model: HamiltonianModel, xs) -> np.ndarray:
        if self.degenerate:
            return np.zeros(np.shape(xs))
        return np.min([self.barrier(model, y, xs) for y in self.aubry], axis=0)


def mechanical_reference(model: HamiltonianModel, samples: int = 8192, tol: float = 1e-9) -> MechanicalReference:
    xs = np.arange(samples) / samples
    V = np.asarray(model.V(xs), dtype=float)
    if float(V.max() - V.min()) <= tol:
        return MechanicalReference(float(V.max()), ())
    peaks = []
    for i in np.flatnonzero((V >= np.roll(V, 1)) & (V >= np.roll(V, -1))):
        x0 = xs[i]
        res = minimize_scalar(lambda s: -float(model.V(s)), bounds=(x0 - 1.0 / samples, x0 + 1.0 / samples),
                              method="bounded", options={"xatol": 1e-12})
        peaks.append((float(-res.fun), float(res.x) % 1.0))
    c = max(v for v, _ in peaks)
    aubry = sorted({round(x, 8) % 1.0 + 0.0 for v, x in peaks if v >= c - tol})
    return MechanicalReference(c, tuple(aubry))
