"""Contact Hamiltonians on the circle, their Lagrangians and a-priori constants.

All built-in models share the separated form

    H(x, p, u) = a(x) * g(u) + p**2 / 2 + V(x)

with three families:

* ``linear``          a = 1, g(u) = u               (classical discount)
* ``nonlinear``       a = 1, g(u) = sum_i c_i u**(i+1)
* ``state_weighted``  a(x) > 0, g(u) = exp(u) - 1

so that the Lagrangian is ``L(x, v, u) = v**2/2 - V(x) - a(x) g(u)`` and
``L_u(x, v, 0) = -a(x) g'(0)``.  A numeric Legendre-Fenchel transform is also
provided for arbitrary convex Hamiltonians and is cross-checked against the
closed forms in the test-suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, NotYetComputed, ResolutionError

TWO_PI = 2.0 * np.pi


def centered(x):
    """Representative of x mod 1 in [-1/2, 1/2] (keeps even functions exactly even)."""
    x = np.asarray(x, dtype=float)
    return x - np.round(x)


@dataclass(frozen=True)
class FourierSeries:
    """Real trigonometric polynomial  sum_k cos[k] cos(2 pi k x) + sin[k] sin(2 pi k x)."""

    cos: tuple[float, ...] = (0.0,)
    sin: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "cos", tuple(float(c) for c in self.cos))
        object.__setattr__(self, "sin", tuple(float(s) for s in self.sin))

    @classmethod
    def cosine_well(cls) -> "FourierSeries":
        # V = cos(2 pi x) - 1, maximum 0 at x = 0
        return cls(cos=(-1.0, 1.0))

    @classmethod
    def two_well(cls) -> "FourierSeries":
        # V = -(1 - cos(4 pi x)) / 2, maxima 0 at x = 0 and x = 1/2
        return cls(cos=(-0.5, 0.0, 0.5))

    @classmethod
    def constant(cls, value: float = 0.0) -> "FourierSeries":
        return cls(cos=(value,))

    def __call__(self, x):
        xc = centered(x)
        out = np.full(np.shape(xc), self.cos[0] if self.cos else 0.0)
        for k, ck in enumerate(self.cos[1:], start=1):
            if ck != 0.0:
                out = out + ck * np.cos((TWO_PI * k) * xc)
        for k, sk in enumerate(self.sin[1:], start=1):
            if sk != 0.0:
                out = out + sk * np.sin((TWO_PI * k) * xc)
        return out if np.ndim(out) else float(out)

    def bounds(self, samples: int = 4096) -> tuple[float, float]:
        vals = self(np.arange(samples) / samples)
        return float(np.min(vals)), float(np.max(vals))


class Family(str, Enum):
    LINEAR = "linear"
    NONLINEAR = "nonlinear"
    STATE_WEIGHTED = "state_weighted"


@dataclass(frozen=True)
class HamiltonianModel:
    """A separated contact Hamiltonian ``a(x) g(u) + p^2/2 + V(x)``.

    Construction does not enforce (H1)-(H4); use :func:`verify_assumptions`,
    which reports violations instead of raising.
    """

    family: Family
    potential: FourierSeries = field(default_factory=FourierSeries.cosine_well)
    weight: FourierSeries | None = None
    g_coeffs: tuple[float, ...] = (1.0,)
    r0: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "g_coeffs", tuple(float(c) for c in self.g_coeffs))
        if self.r0 <= 0:
            raise ValueError("r0 must be positive")
        if self.family is Family.STATE_WEIGHTED and self.weight is None:
            raise ValueError("state_weighted family needs a weight a(x)")
        if self.family is Family.NONLINEAR and not self.g_coeffs:
            raise ValueError("nonlinear family needs g coefficients")

    # -- convenience constructors -------------------------------------------------
    @classmethod
    def pendulum(cls, r0: float = 10.0) -> "HamiltonianModel":
        return cls(Family.LINEAR, FourierSeries.cosine_well(), r0=r0)

    # -- building blocks ---------------------------------------------------------
    @property
    def g_kind(self) -> int:
        """0: polynomial g (coefficients ``g_poly``), 1: g = expm1."""
        return 1 if self.family is Family.STATE_WEIGHTED else 0

    @property
    def g_poly(self) -> np.ndarray:
        if self.family is Family.LINEAR:
            return np.array([1.0])
        if self.family is Family.NONLINEAR:
            return np.array(self.g_coeffs)
        return np.array([1.0])  # unused for expm1

    def V(self, x):
        return self.potential(x)

    def a(self, x):
        if self.family is Family.STATE_WEIGHTED:
            return self.weight(x)
        return np.ones(np.shape(x)) if np.ndim(x) else 1.0

    def g(self, s):
        s = np.asarray(s, dtype=float)
        if self.g_kind == 1:
            out = np.expm1(s)
        else:
            out = poly_discount(s, self.g_poly)
        return out if out.ndim else float(out)

    def g_prime(self, s):
        s = np.asarray(s, dtype=float)
        if self.g_kind == 1:
            out = np.exp(s)
        else:
            coeffs = self.g_poly
            out = np.zeros_like(s)
            for i in range(len(coeffs) - 1, -1, -1):
                out = out * s + (i + 1) * coeffs[i]
        return out if out.ndim else float(out)

    def discount(self, x, u):
        """f(x, u) = a(x) g(u), the u-dependent part of H."""
        return self.a(x) * self.g(u)

    def discount_du(self, x, u):
        return self.a(x) * self.g_prime(u)

    def hamiltonian(self, x, p, u):
        p = np.asarray(p, dtype=float)
        return self.discount(x, u) + 0.5 * p * p + self.V(x)

    def critical_hamiltonian(self, x, p):
        """G(x, p) = H(x, p, 0)."""
        return self.hamiltonian(x, p, 0.0)

    def hamiltonian_du(self, x, p, u):
        return self.discount_du(x, u) + 0.0 * np.asarray(p, dtype=float)

    def lagrangian(self, x, v, u):
        """Closed-form conjugate ``v^2/2 - V(x) - a(x) g(u)`` (u > -r0 not checked)."""
        v = np.asarray(v, dtype=float)
        return 0.5 * v * v - self.V(x) - self.discount(x, u)

    def lagrangian_u0(self, x, v=None):
        """L_u(x, v, 0) = -H_u(x, p~, 0); independent of v for separated models."""
        return -self.a(x) * self.g_prime(0.0)

    # -- level sets --------------------------------------------------------------
    def momentum_bound(self, x, level: float, u: float = 0.0):
        """sup{|p| : H(x, p, u) <= level}, pointwise in x (0 where the set is empty)."""
        slack = level - self.V(x) - self.discount(x, u)
        return np.sqrt(2.0 * np.maximum(slack, 0.0))

    def check_invariants(self, samples: int = 257) -> list[str]:
        xs = np.arange(samples) / samples
        problems = []
        if not np.allclose(self.V(xs), self.V(xs + 1.0), atol=1e-12, rtol=0):
            problems.append("potential is not 1-periodic")
        if self.family is Family.STATE_WEIGHTED and float(np.min(self.weight(xs))) <= 0:
            problems.append("weight a(x) is not positive")
        us = np.linspace(-self.r0, self.r0, samples)
        gs = self.g(us)
        if np.any(np.diff(gs) <= 0):
            problems.append("g is not strictly increasing")
        if abs(self.g(0.0)) > 0:
            problems.append("g(0) != 0")
        return problems


def poly_discount(s, coeffs):
    """g(s) = sum_i coeffs[i] s**(i+1), Horner order shared with the kernels."""
    s = np.asarray(s, dtype=float)
    acc = np.zeros_like(s)
    for c in coeffs[::-1]:
        acc = acc * s + c
    return acc * s


# ---------------------------------------------------------------------------
# Legendre-Fenchel transform
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LagrangianEval:
    value: float
    argmax_p: float
    Lu0: float


def conjugate_numeric(
    H_of_p: Callable[[np.ndarray], np.ndarray],
    v: float,
    radius: float,
    n_grid: int = 2049,
    refine: bool = True,
) -> tuple[float, float]:
    """sup_p [p v - H(p)] over a symmetric momentum grid, optionally polished.

    Returns ``(value, argmax)``; the grid argmax takes the smallest p among
    ties.  With ``refine`` the maximum is polished by a bounded Brent search on
    the two neighbouring grid cells, which is exact up to ~1e-12 for strictly
    concave objectives and never worse than the grid value.
    """
    ps = np.linspace(-radius, radius, n_grid)
    vals = ps * v - H_of_p(ps)
    i = int(np.argmax(vals))
    if i == 0 or i == n_grid - 1:
        raise ResolutionError(
            f"argmax p={ps[i]:.6g} on the momentum-grid boundary (radius {radius:.6g})"
        )
    best_p, best_val = float(ps[i]), float(vals[i])
    if refine:
        res = minimize_scalar(
            lambda p: -(p * v - float(H_of_p(np.array([p]))[0])),
            bounds=(float(ps[i - 1]), float(ps[i + 1])),
            method="bounded",
            options={"xatol": 1e-13},
        )
        if -res.fun > best_val:
            best_p, best_val = float(res.x), float(-res.fun)
    return best_val, best_p


def default_momentum_radius(model: HamiltonianModel, v: float, u: float) -> float:
    # 4 * rho over the level max_x G(x, 0) >= c(G); |v| keeps the argmax interior
    lo, hi = model.potential.bounds()
    xs = np.arange(256) / 256
    level = float(np.max(model.hamiltonian(xs, 0.0, u)))
    rho = float(np.max(model.momentum_bound(xs, level, u)))
    return 4.0 * max(rho, abs(v), 1.0)


def legendre_transform(
    model: HamiltonianModel,
    x: float,
    v: float,
    u: float,
    numeric: bool = False,
    radius: float | None = None,
    n_grid: int = 2049,
    refine: bool = True,
) -> LagrangianEval:
    """L(x, v, u) = sup_p [p v - H(x, p, u)] together with the argmax and L_u(x, v, 0)."""
    if u <= -model.r0:
        raise DomainError(f"u={u} must exceed -r0={-model.r0}")
    if numeric:
        if radius is None:
            radius = default_momentum_radius(model, v, u)
        value, p_star = conjugate_numeric(
            lambda p: model.hamiltonian(x, p, u), v, radius, n_grid, refine
        )
        # L_u(x, v, 0) = -H_u(x, p~, 0) at the argmax of the u = 0 problem
        if u == 0.0:
            p0 = p_star
        else:
            _, p0 = conjugate_numeric(lambda p: model.hamiltonian(x, p, 0.0), v, radius, n_grid, refine)
        lu0 = -float(model.hamiltonian_du(x, p0, 0.0))
        return LagrangianEval(value, p_star, lu0)
    value = float(model.lagrangian(x, v, u))
    return LagrangianEval(value, float(v), float(model.lagrangian_u0(x, v)))


def compute_Lu0(model: HamiltonianModel, x: float, v: float, numeric: bool = False) -> float:
    """Weight L_u(x, v, 0) = -H_u(x, p~, 0) with p~ the Fenchel argmax at (x, v, 0)."""
    return legendre_transform(model, x, v, 0.0, numeric=numeric).Lu0


# ---------------------------------------------------------------------------
# Assumption probes
# ---------------------------------------------------------------------------


@dataclass
class AssumptionCheck:
    name: str
    passed: bool
    detail: str
    worst: float = 0.0


@dataclass
class AssumptionReport:
    checks: dict[str, AssumptionCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failures(self) -> list[AssumptionCheck]:
        return [c for c in self.checks.values() if not c.passed]

    def __getitem__(self, key: str) -> AssumptionCheck:
        return self.checks[key]


def verify_assumptions(
    model: HamiltonianModel,
    n_x: int = 32,
    n_p: int = 32,
    n_u: int = 16,
    p_max: float | None = None,
    tol: float = 1e-10,
    quotient_floor: float = 1e-6,
) -> AssumptionReport:
    """Sample-based probes of (H1) convexity, (H2) coercivity, (H3) monotonicity, (H4).

    Failures are reported, never raised.
    """
    if min(n_x, n_p, n_u) < 10:
        raise ValueError("assumption probes need at least 10 samples per axis")
    H = model.hamiltonian
    xs = np.arange(n_x) / n_x
    if p_max is None:
        p_max = 2.0 * default_momentum_radius(model, 0.0, 0.0)
    ps = np.linspace(-p_max, p_max, n_p)
    us = np.linspace(-model.r0, model.r0, n_u)
    X, P, U = np.meshgrid(xs, ps, us, indexing="ij")
    checks: dict[str, AssumptionCheck] = {}

    # (H1) midpoint convexity along p for every sampled (x, u)
    Q = P[:, ::-1, :]
    gap = H(X, 0.5 * (P + Q), U) - 0.5 * (H(X, P, U) + H(X, Q, U))
    worst = float(np.max(gap))
    checks["H1"] = AssumptionCheck(
        "H1", worst <= tol * max(1.0, float(np.max(np.abs(H(X, P, U))))),
        f"max midpoint excess {worst:.3e}", worst,
    )

    # (H3) strict monotonicity in u on consecutive sampled pairs
    vals = H(X, P, U)
    du = np.diff(vals, axis=2)
    worst = float(np.min(du))
    bad = np.argwhere(du <= 0)
    detail = f"min increment {worst:.3e}"
    if bad.size:
        bx = sorted({round(float(xs[i]), 6) for i in bad[:, 0]})
        detail += f"; non-increasing at x in {bx[:8]}"
    checks["H3"] = AssumptionCheck("H3", worst > 0, detail, worst)

    checks["H2"] = _probe_coercivity(model, xs)

    # (H4) difference quotients in u converge to H_u(x, p, 0) > 0
    Xc, Pc = np.meshgrid(xs, np.linspace(-p_max / 2, p_max / 2, n_p), indexing="ij")
    h0 = H(Xc, Pc, 0.0)
    hu = model.hamiltonian_du(Xc, Pc, 0.0)
    errs, qmins, floors = [], [], []
    for step in (1e-2, 1e-3, 1e-4):
        q_plus = (H(Xc, Pc, step) - h0) / step
        q_minus = (H(Xc, Pc, -step) - h0) / (-step)
        errs.append(float(max(np.max(np.abs(q_plus - hu)), np.max(np.abs(q_minus - hu)))))
        qmins.append(float(min(np.min(q_plus), np.min(q_minus))))
        # cancellation in H(u + step) - H(u) limits what the quotient can resolve
        floors.append(1e3 * np.finfo(float).eps * float(np.max(np.abs(h0)) + 1.0) / step)
    scale = max(1.0, float(np.max(np.abs(hu))))
    converging = all(b <= max(a * 1.01, f) for a, b, f in zip(errs, errs[1:], floors[1:]))
    converging = converging and errs[-1] <= 1e-3 * scale
    positive = qmins[-1] > quotient_floor and float(np.min(hu)) > quotient_floor
    checks["H4"] = AssumptionCheck(
        "H4", converging and positive,
        f"sup errors {['%.2e' % e for e in errs]}, min quotient at u=1e-4 {qmins[-1]:.3e}",
        qmins[-1],
    )
    return AssumptionReport(checks)


def _probe_coercivity(model: HamiltonianModel, xs: np.ndarray, n_dir: int = 24) -> AssumptionCheck:
    """Appendix-style probe: a linear lower bound for H(., ., -r0) outside a ball.

    r is chosen so that H(x, p, 0) > max_x H(x, 0, 0) + 2 on |p| = r (coercivity of
    G); it is enlarged until H(x, p, -r0) > max_x H(x, 0, -r0) + 1 on |p| = r, and
    then ``H(x, p, -r0) >= |p|/r + H(x, 0, -r0)`` is checked for sampled |p| > r.
    """
    H = model.hamiltonian
    r0 = model.r0
    base0 = float(np.max(H(xs, 0.0, 0.0)))
    r = 1.0
    while True:
        ring = np.minimum(H(xs, r, 0.0), H(xs, -r, 0.0))
        if float(np.min(ring)) > base0 + 2.0:
            break
        r *= 2.0
        if r > 1e8:
            return AssumptionCheck("H2", False, "G(x, .) not coercive up to |p| = 1e8", np.inf)
    r_appendix = r
    base_r0 = float(np.max(H(xs, 0.0, -r0)))
    while float(np.min(np.minimum(H(xs, r, -r0), H(xs, -r, -r0)))) <= base_r0 + 1.0:
        r *= 2.0
        if r > 1e8:
            return AssumptionCheck("H2", False, "H(., ., -r0) not coercive up to |p| = 1e8", np.inf)
    pmag = r * np.geomspace(1.0 + 1e-6, 1e3, n_dir)
    X, Pm = np.meshgrid(xs, pmag, indexing="ij")
    lhs = np.minimum(H(X, Pm, -r0), H(X, -Pm, -r0))
    rhs = Pm / r + H(X, 0.0, -r0)
    worst = float(np.min(lhs - rhs))
    return AssumptionCheck(
        "H2", worst >= -1e-9,
        f"r={r:.3g} (from G: {r_appendix:.3g}); min slack of |p|/r lower bound {worst:.3e}",
        worst,
    )


# ---------------------------------------------------------------------------
# A-priori constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AprioriConstants:
    C0: float
    M0: float
    alpha0: float
    sigma0: float
    rho_c: float

    def as_dict(self) -> dict[str, float]:
        return {"C0": self.C0, "M0": self.M0, "alpha0": self.alpha0,
                "sigma0": self.sigma0, "rho_c": self.rho_c}


C0_FLOOR = 1e-9
ALPHA0_CAP = 1e6


def apriori_constants(
    model: HamiltonianModel,
    scheme,
    c: float | None,
    critical_solution: Sequence[float] | None,
) -> AprioriConstants:
    """Bounds C0, M0, alpha0 = r0 / C0, sigma0 and rho_c on the grid of ``scheme``.

    ``critical_solution`` is a critical solution such as ``h(y0, .)`` for an
    Aubry node ``y0``; ``C0`` is twice its oscillation.
    """
    if c is None or critical_solution is None:
        raise NotYetComputed("apriori_constants needs c(G) and a critical solution")
    xs = scheme.centered_positions
    w0 = np.asarray(critical_solution, dtype=float)
    osc = float(np.max(w0) - np.min(w0))
    C0 = max(2.0 * osc, C0_FLOOR)
    alpha0 = min(model.r0 / C0, ALPHA0_CAP)
    rho_c = float(np.max(model.momentum_bound(xs, c, 0.0)))
    M0 = float(np.max(model.momentum_bound(xs, c, -model.r0)))
    # sigma0 = max over x, |v| <= vmax of (M0 + 1)|v| - L(x, v, r0) - c
    k = M0 + 1.0
    vmax = scheme.max_speed
    kinetic = 0.5 * k * k if k <= vmax else k * vmax - 0.5 * vmax * vmax
    sigma0 = float(np.max(kinetic + model.V(xs) + model.discount(xs, model.r0) - c))
    return AprioriConstants(C0=C0, M0=M0, alpha0=alpha0, sigma0=max(sigma0, C0_FLOOR), rho_c=rho_c)
