"""
Superlinear Speedup Module

Conditions under which S > p, expressed on the exponent of parallelism:

    exact:          F > log(1 - 1/p)
    approximate:    F > -1/(2p^2) - 1/p
    speedup form:   1/(2S^2) + 1/S < 1/(2p^2) + 1/p

and the processor bound for the FFT cost model with C = A/B, where the
quadratic term in S is disregarded:

    p < (n + sqrt(n^2 + 2Cn)) / (2C)
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional

from speeduplab.amdahl_core import exponent_approx, exponent_exact
from speeduplab.errors import AmdahlDomainError, MinimalConditionViolated

logger = logging.getLogger(__name__)


def _require_processors(p: float) -> None:
    if not (math.isfinite(p) and p > 1):
        raise AmdahlDomainError(f"processor count must exceed 1, got {p!r}")


def superlinear_threshold_exact(p: float) -> float:
    """log(1 - 1/p)"""
    _require_processors(p)
    return math.log1p(-1 / p)


def superlinear_threshold_approx(p: float) -> float:
    """-1/(2p^2) - 1/p, the lower bound F must exceed for superlinearity"""
    _require_processors(p)
    return -1 / (2 * p * p) - 1 / p


def superlinear_exact(exponent: float, p: float) -> bool:
    """True iff F > log(1 - 1/p); for exact F = log(1 - 1/S) this is S > p"""
    return exponent > superlinear_threshold_exact(p)


def superlinear_approx(exponent: float, p: float) -> bool:
    return exponent > superlinear_threshold_approx(p)


def _speedup_side(x: float) -> float:
    return 1 / (2 * x * x) + 1 / x


def superlinear_speedup_condition(s: float, p: float) -> bool:
    """True iff 1/(2S^2) + 1/S < 1/(2p^2) + 1/p"""
    _require_processors(p)
    if not (math.isfinite(s) and s > 0):
        raise AmdahlDomainError(f"speedup must be positive and finite, got {s!r}")
    return _speedup_side(s) < _speedup_side(p)


def fft_superlinear_pmax(c: float, n: float) -> float:
    """
    Supremum of processor counts admitting superlinearity for the FFT model

    Args:
        c: Ratio A/B of the FFT model constants
        n: Problem dimension

    Returns:
        float: (n + sqrt(n^2 + 2Cn)) / (2C); the inequality on p is strict
    """
    if not (math.isfinite(c) and c > 0):
        raise AmdahlDomainError(f"C must be positive and finite, got {c!r}")
    if not (math.isfinite(n) and n >= 1):
        raise AmdahlDomainError(f"n must be >= 1, got {n!r}")
    return (n + math.sqrt(n * n + 2 * c * n)) / (2 * c)


def fft_superlinear_scan(c: float, n: float) -> int:
    """
    Largest integer p with C/n < 1/(2p^2) + 1/p, 0 when even p = 1 fails

    The right-hand side decreases in p, so the predicate is monotone:
    double until it fails, then bisect.
    """
    if not (math.isfinite(c) and c > 0):
        raise AmdahlDomainError(f"C must be positive and finite, got {c!r}")
    if not (math.isfinite(n) and n >= 1):
        raise AmdahlDomainError(f"n must be >= 1, got {n!r}")

    target = c / n

    def holds(p: int) -> bool:
        return target < _speedup_side(p)

    if not holds(1):
        return 0
    low, high = 1, 2
    while holds(high):
        low, high = high, high * 2
    while high - low > 1:
        middle = (low + high) // 2
        if holds(middle):
            low = middle
        else:
            high = middle
    return low


@dataclass(frozen=True)
class SuperlinearReport:
    """All three superlinearity conditions for one (S, p)"""

    s: float
    p: float
    exact_holds: bool
    approx_holds: bool
    speedup_form_holds: bool
    threshold_exact: float
    threshold_approx: float
    exponent_exact: Optional[float] = None
    exponent_approx: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "speedup": self.s,
            "p": self.p,
            "exact_holds": self.exact_holds,
            "approx_holds": self.approx_holds,
            "speedup_form_holds": self.speedup_form_holds,
            "threshold_exact": self.threshold_exact,
            "threshold_approx": self.threshold_approx,
            "exponent_exact": self.exponent_exact,
            "exponent_approx": self.exponent_approx,
        }


def superlinear_report(s: float, p: float) -> SuperlinearReport:
    """
    Evaluate the superlinearity conditions for a measured speedup

    The exact condition needs S > 1 and the approximate one needs S >= 2
    (minimal condition); outside those ranges the condition is reported
    as not holding and the corresponding exponent is None.
    """
    threshold_exact = superlinear_threshold_exact(p)
    threshold_approx = superlinear_threshold_approx(p)
    speedup_form = superlinear_speedup_condition(s, p)

    exact_value = exponent_exact(s) if s > 1 else None
    try:
        approx_value: Optional[float] = exponent_approx(s)
    except MinimalConditionViolated:
        approx_value = None

    report = SuperlinearReport(
        s=float(s),
        p=float(p),
        exact_holds=exact_value is not None and exact_value > threshold_exact,
        approx_holds=approx_value is not None and approx_value > threshold_approx,
        speedup_form_holds=speedup_form,
        threshold_exact=threshold_exact,
        threshold_approx=threshold_approx,
        exponent_exact=exact_value,
        exponent_approx=approx_value,
    )
    logger.debug(f"[SUPERLINEAR] S={s!r}, p={p!r}: exact={report.exact_holds}, "
                 f"approx={report.approx_holds}, speedup form={report.speedup_form_holds}")
    return report
