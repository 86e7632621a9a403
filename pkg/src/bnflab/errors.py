"""Exception hierarchy.

Mathematical failures (small divisors, resonances, non-convergence) derive
from :class:`MathError` so callers can distinguish them from plain input
validation errors, which are raised as ``ValueError`` throughout.
"""


class MathError(Exception):
    """A computation failed for a mathematical reason, not a usage one."""


class SmallDivisor(MathError):
    """A divisor <omega, m> fell below the configured resonance tolerance."""

    def __init__(self, m, value, tol):
        super().__init__(
            f"divisor <omega, {tuple(m)}> = {value!r} is within tolerance {tol!r}"
        )
        self.m = tuple(m)
        self.value = value
        self.tol = tol


class ResonantInput(MathError):
    """An exact divisor <omega, m> vanished identically."""

    def __init__(self, m):
        super().__init__(f"exact divisor <omega, {tuple(m)}> is identically zero")
        self.m = tuple(m)


class ResonantTime(MathError):
    """A trace was requested at (or too close to) a period of the flow."""

    def __init__(self, omega_j, t):
        super().__init__(f"time {t} is resonant for frequency {omega_j}")
        self.omega_j = omega_j
        self.t = t


class NonRepresentableScaling(MathError):
    """Quadratic normalization has no exact rational scaling."""


class GridConvergenceError(MathError):
    """Grid refinement left eigenvalues drifting beyond the tolerance."""


class BoxTooSmall(MathError):
    """The classically allowed region reaches the computational box."""


class AmbiguousLabels(MathError):
    """Two predicted harmonic levels are too close to assign labels safely."""


class RankDeficientFit(MathError):
    """The least-squares design matrix does not determine the coefficients."""


class IllConditionedLadder(MathError):
    """The hbar ladder is too tight to separate expansion orders."""


class TruncatedSpectrum(ValueError):
    """A spectrum sample does not exhaust the requested energy window."""
