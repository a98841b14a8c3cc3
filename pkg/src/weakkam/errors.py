"""Exception hierarchy for weakkam.

Every failure raised by the numerical modules derives from :class:`WeakKAMError`
so callers (notably the CLI) can map them to machine-readable failure records.
"""

from __future__ import annotations


class WeakKAMError(Exception):
    """Base class for all weakkam errors."""


class DomainError(WeakKAMError, ValueError):
    """Argument outside the domain where the Lagrangian is finite (u <= -r0)."""


class ResolutionError(WeakKAMError):
    """The numeric Fenchel supremum is not bracketed by the momentum grid."""


class NotYetComputed(WeakKAMError):
    """A quantity needed downstream (critical value, barrier) is missing."""


class ContractionViolation(WeakKAMError):
    """tau * lambda * B >= 1: the explicit Bellman operator is not monotone."""


class DiscountTooLarge(WeakKAMError, ValueError):
    """lambda is not below the a-priori threshold alpha0."""


class MaxIterExceeded(WeakKAMError):
    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")
        self.residual = residual
        self.iterations = iterations


class NotAFixedPoint(WeakKAMError):
    """Calibration residual along an extracted trajectory is too large."""


class NegativeCycle(WeakKAMError):
    """Reduced costs carry a negative cycle: the level is below critical."""


class EmptyAubry(WeakKAMError):
    pass


class CycleExplosion(WeakKAMError):
    def __init__(self, count: int, cap: int):
        super().__init__(f"critical subgraph has more than {cap} simple cycles (found {count})")
        self.count = count
        self.cap = cap


class LPInfeasible(WeakKAMError):
    pass


class LPUnbounded(WeakKAMError):
    pass


class DegenerateWeight(WeakKAMError):
    """A Mather measure integrates L_u(.,.,0) to (almost) zero."""


class PreconditionFailed(WeakKAMError):
    pass


class ConvergenceFailure(WeakKAMError):
    def __init__(self, message: str, rows=None):
        super().__init__(message)
        self.rows = rows or []


class TailNotDecaying(WeakKAMError):
    pass


class RefinementNotDecreasing(WeakKAMError):
    def __init__(self, quantity: str, errors):
        super().__init__(f"{quantity} error does not decrease under refinement: {list(errors)}")
        self.quantity = quantity
        self.errors = list(errors)


class ConfigError(WeakKAMError, ValueError):
    pass
