"""
Speedup Algebra Module

Conversions among speedup S, parallelizable fraction f and exponent of
parallelism F, the classical Amdahl formulas, the quadratic approximation
of Exp(F) and the minimal condition of parallelism.

Relations used:
    S = p / (f(1-p) + p)                 Amdahl's law
    f = (p/(p-1)) Exp(F)                 definition of F
    S = 1 / (1 - Exp(F))                 exact, independent of p
    f ~ (p/(p-1)) (1 + F + F^2/2)        quadratic approximation
    F ~ -1 + sqrt(1 - 2/S)               its inverse, real iff S >= 2
"""

import enum
import math
from typing import Union

from speeduplab.errors import AmdahlDomainError, MinimalConditionViolated

# Plain floats carry the values; the aliases document intent.
Speedup = float
Fraction = float
Exponent = float


class Outcome(enum.Enum):
    """Non-numeric results of limits and conversions"""

    PLUS_INFINITY = "plus_infinity"
    MINUS_INFINITY = "minus_infinity"
    NOT_APPLICABLE = "not_applicable"


UNBOUNDED = Outcome.PLUS_INFINITY

SpeedupOrUnbounded = Union[float, Outcome]


def _require_processors(p: float) -> None:
    if not (math.isfinite(p) and p > 1):
        raise AmdahlDomainError(f"processor count must exceed 1, got {p!r}")


def _require_positive(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0):
        raise AmdahlDomainError(f"{name} must be positive and finite, got {value!r}")


def speedup_from_fraction(f: Fraction, p: float) -> Speedup:
    """
    Amdahl's law: speedup of a code with parallelizable fraction f on p processors

    Raises:
        AmdahlDomainError: If p <= 1 or f(1-p) + p <= 0 (f at or beyond p/(p-1))
    """
    _require_processors(p)
    _require_positive("fraction", f)
    denominator = f * (1 - p) + p
    if denominator <= 0:
        raise AmdahlDomainError(
            f"f={f!r} is at or beyond p/(p-1) for p={p!r}; speedup is unbounded"
        )
    return p / denominator


def amdahl_limit(f: Fraction) -> SpeedupOrUnbounded:
    """
    Limit of Amdahl's law for p -> infinity, 1/(1-f)

    Returns:
        The limiting speedup, or Outcome.PLUS_INFINITY for f = 1
    """
    if not (math.isfinite(f) and 0 < f <= 1):
        raise AmdahlDomainError(f"fraction must lie in (0, 1], got {f!r}")
    if f == 1:
        return UNBOUNDED
    return 1 / (1 - f)


def fraction_from_speedup(s: Speedup, p: float) -> Fraction:
    """Invert Amdahl's law: f = (p/(p-1)) (1 - 1/S)"""
    _require_processors(p)
    _require_positive("speedup", s)
    return (p / (p - 1)) * (1 - 1 / s)


def fraction_from_exponent(exponent: Exponent, p: float) -> Fraction:
    """Exact definition of the exponent: f = (p/(p-1)) Exp(F)"""
    _require_processors(p)
    return (p / (p - 1)) * math.exp(exponent)


def exponent_from_fraction(f: Fraction, p: float) -> Exponent:
    """F = Log(f (p-1)/p)"""
    _require_processors(p)
    _require_positive("fraction", f)
    return math.log(f * (p - 1) / p)


def exponent_exact(s: Speedup) -> Exponent:
    """
    Exact exponent of parallelism for a speedup, F = Log(1 - 1/S)

    Raises:
        AmdahlDomainError: If S <= 1 (no parallel gain)
    """
    if not (math.isfinite(s) and s > 1):
        raise AmdahlDomainError(f"exponent is defined only for S > 1, got {s!r}")
    return math.log1p(-1 / s)


def speedup_from_exponent(exponent: Exponent) -> SpeedupOrUnbounded:
    """
    Exact inverse of exponent_exact, S = 1/(1 - Exp(F))

    Returns:
        The speedup, or Outcome.PLUS_INFINITY for F >= 0
    """
    if math.isnan(exponent):
        raise AmdahlDomainError("exponent is NaN")
    if exponent >= 0:
        return UNBOUNDED
    return 1 / -math.expm1(exponent)


def _approx_from_ratio(ratio: float) -> Exponent:
    # -1 + sqrt(1 - 2r) written without cancellation for small r
    return -2 * ratio / (1 + math.sqrt(1 - 2 * ratio))


def exponent_from_ratio(ratio: float) -> Exponent:
    """
    F = -1 + sqrt(1 - 2 T_par(p,n)/T_par(1,n)) for a time ratio

    Raises:
        MinimalConditionViolated: If ratio > 1/2
    """
    if not (math.isfinite(ratio) and ratio > 0):
        raise AmdahlDomainError(f"time ratio must be positive, got {ratio!r}")
    if ratio > 0.5:
        raise MinimalConditionViolated(ratio)
    return _approx_from_ratio(ratio)


def exponent_approx(s: Speedup) -> Exponent:
    """
    Quadratic approximation of the exponent, F = -1 + sqrt(1 - 2/S)

    Raises:
        MinimalConditionViolated: If S < 2
    """
    _require_positive("speedup", s)
    return exponent_from_ratio(1 / s)


def fraction_approx_from_exponent(exponent: Exponent, p: float) -> Fraction:
    """
    f = (p/(p-1)) (1 + F + F^2/2)

    Near F = 0 the truncation overshoots (F = 0 gives p/(p-1) > 1); callers
    treat values above 1 there as an approximation artifact.
    """
    _require_processors(p)
    return (p / (p - 1)) * (1 + exponent + exponent * exponent / 2)


def speedup_from_exponent_approx(exponent: Exponent) -> Speedup:
    """
    S = -1/(F + F^2/2), exact inverse of exponent_approx on (-2, 0)
    """
    if not -2 < exponent < 0:
        raise AmdahlDomainError(f"approximate inverse needs -2 < F < 0, got {exponent!r}")
    return -1 / (exponent * (1 + exponent / 2))


def minimal_condition(t_par_p: float, t_par_1: float) -> bool:
    """True iff T_par(p,n) <= T_par(1,n)/2, i.e. S >= 2"""
    _require_positive("parallel time", t_par_p)
    _require_positive("serial time", t_par_1)
    return t_par_p <= t_par_1 / 2
