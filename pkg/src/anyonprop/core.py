"""Shared value types and exceptions.

Units throughout: unit mass, hbar = 1, so time carries units of length squared.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

TWO_PI = 2.0 * math.pi


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class UsageError(ValueError):
    """Inconsistent combination of otherwise valid arguments."""


class EvaluationError(ArithmeticError):
    """A numerical procedure failed to reach its requested accuracy.

    ``diagnostics`` carries whatever the failing routine knew at the time
    (partial sums, tail estimates, term counts, suggested parameters).
    """

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class SamplingError(EvaluationError):
    """Monte Carlo path could not be resolved within the retry limit."""


class Regime(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    REALTIME = "realtime"


@dataclass(frozen=True)
class PolarPoint:
    """Point of the punctured plane, or of its covering space.

    ``theta`` is any real number: on the covering space angles are not
    reduced modulo the period.
    """

    r: float
    theta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r > 0.0):
            raise DomainError(f"radius must be finite and > 0, got {self.r!r}")
        if not math.isfinite(self.theta):
            raise DomainError(f"angle must be finite, got {self.theta!r}")

    def cartesian(self) -> tuple[float, float]:
        return self.r * math.cos(self.theta), self.r * math.sin(self.theta)


@dataclass(frozen=True)
class TimeMode:
    """Evaluation regime and elapsed time ``T``.

    Euclidean amplitudes are the real-time formulas continued by T -> -iT.
    """

    regime: Regime
    T: float

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime(self.regime))
        if not (math.isfinite(self.T) and self.T > 0.0):
            raise DomainError(f"time must be finite and > 0, got {self.T!r}")

    @classmethod
    def euclidean(cls, T: float) -> "TimeMode":
        return cls(Regime.EUCLIDEAN, T)

    @classmethod
    def realtime(cls, T: float) -> "TimeMode":
        return cls(Regime.REALTIME, T)

    @property
    def is_euclidean(self) -> bool:
        return self.regime is Regime.EUCLIDEAN


@dataclass(frozen=True)
class SectorLabel:
    """Homotopy class ``n`` with angular period 2*pi (one particle around a
    flux tube) or pi (relative coordinate of two identical particles)."""

    n: int
    period: float = TWO_PI

    def __post_init__(self):
        if not (math.isclose(self.period, TWO_PI) or math.isclose(self.period, math.pi)):
            raise DomainError(f"period must be 2*pi or pi, got {self.period!r}")
        object.__setattr__(self, "n", int(self.n))

    def delta_theta(self, theta_src: float, theta_dst: float) -> float:
        return theta_dst + self.n * self.period - theta_src


@dataclass(frozen=True)
class TruncationPolicy:
    """Stopping rule for outward series summation.

    A series stops once ``consecutive_small`` successive terms are each below
    ``rel_tol * |partial sum|``, never before ``min_terms`` terms.
    """

    rel_tol: float = 1e-12
    min_terms: int = 4
    max_terms: int = 2000
    consecutive_small: int = 3

    def __post_init__(self):
        if not self.rel_tol > 0.0:
            raise DomainError("rel_tol must be > 0")
        if self.min_terms < 1:
            raise DomainError("min_terms must be >= 1")
        if self.consecutive_small < 2:
            raise DomainError("consecutive_small must be >= 2")
        if self.max_terms < self.min_terms:
            raise DomainError("max_terms must be >= min_terms")


@dataclass(frozen=True)
class PropagatorValue:
    """Complex amplitude with the remainder estimate that was actually computed."""

    amplitude: complex
    error_estimate: float = 0.0
    terms_used: int = 0
    info: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def real(self) -> float:
        return self.amplitude.real

    @property
    def imag(self) -> float:
        return self.amplitude.imag

    def __abs__(self) -> float:
        return abs(self.amplitude)
