"""
Asymptotics Module

Numeric estimation of p -> infinity limits of sequences derived from cost
models and growth functions: the time ratio T_par(p,g(p))/T_ser(g(p)), the
exponent of parallelism along g, and the growth ratio g(p)/p.

Sequences are sampled on a geometric schedule p = 2^k. Convergence is
judged on Aitken delta-squared extrapolates of the tail; divergence is
judged on the raw values.
"""

import enum
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

from speeduplab.amdahl_core import Outcome, exponent_from_ratio
from speeduplab.config import MIN_SCHEDULE_POINTS, get_settings
from speeduplab.errors import (
    LimitEvaluationError,
    ModelError,
    NonFiniteResultError,
    SpeedupLabError,
    UsageError,
)
from speeduplab.model_library import CostModel, GrowthFunction, admissible

logger = logging.getLogger(__name__)

# Raw values inspected for divergence
DIVERGENCE_WINDOW = 5
# Deltas that keep at least this share of their size over the window do not contract
NON_CONTRACTING = 0.95

LimitValue = Union[float, Outcome]
ExponentValue = Union[float, Outcome]


@dataclass(frozen=True)
class Schedule:
    """Processor counts at which a sequence is sampled, plus convergence settings"""

    p_values: Tuple[float, ...]
    tol: float = 1e-6
    min_consecutive: int = 3

    def __post_init__(self):
        if len(self.p_values) < MIN_SCHEDULE_POINTS:
            raise UsageError(f"schedule needs at least {MIN_SCHEDULE_POINTS} points")
        if any(not (math.isfinite(p) and p >= 2) for p in self.p_values):
            raise UsageError("schedule points must be finite and >= 2")
        if any(b <= a for a, b in zip(self.p_values, self.p_values[1:])):
            raise UsageError("schedule points must be strictly increasing")
        if not self.tol > 0:
            raise UsageError("schedule tolerance must be positive")
        if self.min_consecutive < 1:
            raise UsageError("min_consecutive must be >= 1")

    @classmethod
    def geometric(cls, min_exp: int = 4, max_exp: int = 40, tol: float = 1e-6,
                  min_consecutive: int = 3) -> "Schedule":
        """p = 2^min_exp, 2^(min_exp+1), ..., 2^max_exp"""
        return cls(
            tuple(float(2 ** k) for k in range(min_exp, max_exp + 1)),
            tol=tol,
            min_consecutive=min_consecutive,
        )

    @classmethod
    def default(cls) -> "Schedule":
        settings = get_settings()
        return cls.geometric(
            settings.schedule_min_exp,
            settings.schedule_max_exp,
            tol=settings.limit_tol,
            min_consecutive=settings.min_consecutive,
        )


@dataclass(frozen=True)
class LimitEstimate:
    """
    A numerically estimated limit

    value is a float or one of Outcome.PLUS_INFINITY / MINUS_INFINITY /
    NOT_APPLICABLE. skipped lists schedule points left out of the estimate
    (minimal condition failures); truncated_at is the first point that
    overflowed, if any. clamped lists points whose ratio lay just above 1/2
    and was counted as F = -1.
    """

    value: LimitValue
    converged: bool
    residual: float
    samples: Tuple[Tuple[float, float], ...]
    skipped: Tuple[float, ...] = ()
    truncated_at: Optional[float] = None
    clamped: Tuple[float, ...] = ()

    @property
    def is_finite(self) -> bool:
        return not isinstance(self.value, Outcome)


class GrowthKind(str, enum.Enum):
    FINITE_RATIO = "finite_ratio"
    INFINITE_RATIO = "infinite_ratio"
    REJECTED = "rejected"


@dataclass(frozen=True)
class GrowthRatioEstimate:
    limit: LimitEstimate
    kind: GrowthKind


def aitken_extrapolate(values: Sequence[float]) -> List[float]:
    """
    Aitken delta-squared transform

    Element i is computed from values[i], values[i+1], values[i+2]; a zero
    second difference leaves the newest value unchanged.
    """
    extrapolated = []
    for x0, x1, x2 in zip(values, values[1:], values[2:]):
        d1 = x1 - x0
        d2 = x2 - x1
        denominator = d2 - d1
        if denominator == 0:
            extrapolated.append(x2)
            continue
        estimate = x2 - d2 * d2 / denominator
        extrapolated.append(estimate if math.isfinite(estimate) else x2)
    return extrapolated


def _divergence(values: Sequence[float], tol: float) -> Optional[Outcome]:
    if len(values) < DIVERGENCE_WINDOW:
        return None
    window = values[-DIVERGENCE_WINDOW:]
    deltas = [b - a for a, b in zip(window, window[1:])]
    if all(d > 0 for d in deltas):
        if window[-1] > 1 / tol or deltas[-1] >= NON_CONTRACTING * deltas[0]:
            return Outcome.PLUS_INFINITY
    elif all(d < 0 for d in deltas):
        if window[-1] < -1 / tol or deltas[-1] <= NON_CONTRACTING * deltas[0]:
            return Outcome.MINUS_INFINITY
    return None


def _estimate_from_samples(samples: Sequence[Tuple[float, float]], sched: Schedule,
                           skipped: Tuple[float, ...] = (),
                           truncated_at: Optional[float] = None,
                           clamped: Tuple[float, ...] = ()) -> LimitEstimate:
    values = [value for _, value in samples]
    direction = _divergence(values, sched.tol)
    if direction is not None:
        logger.debug(f"[LIMIT] Sequence diverges to {direction.value}")
        return LimitEstimate(direction, False, abs(values[-1] - values[-2]),
                             tuple(samples), skipped, truncated_at, clamped)

    extrapolated = aitken_extrapolate(values)
    deltas = [abs(b - a) for a, b in zip(extrapolated, extrapolated[1:])]
    tail = deltas[-sched.min_consecutive:]
    converged = len(tail) == sched.min_consecutive and all(d < sched.tol for d in tail)
    residual = deltas[-1] if deltas else math.inf
    return LimitEstimate(extrapolated[-1], converged, residual,
                         tuple(samples), skipped, truncated_at, clamped)


def _sample(seq: Callable[[float], float],
            sched: Schedule) -> Tuple[List[Tuple[float, float]], Optional[float]]:
    samples: List[Tuple[float, float]] = []
    truncated_at = None
    for p in sched.p_values:
        try:
            value = float(seq(p))
        except (NonFiniteResultError, OverflowError) as e:
            truncated_at = p
            logger.warning(f"[LIMIT] Schedule truncated at p={p:g}: {e}")
            break
        except SpeedupLabError as e:
            raise LimitEvaluationError(p, str(e)) from e
        if not math.isfinite(value):
            truncated_at = p
            logger.warning(f"[LIMIT] Schedule truncated at p={p:g}: non-finite value")
            break
        samples.append((p, value))
    if len(samples) < MIN_SCHEDULE_POINTS:
        raise LimitEvaluationError(
            truncated_at if truncated_at is not None else sched.p_values[0],
            f"only {len(samples)} schedule points evaluate finitely, need {MIN_SCHEDULE_POINTS}",
        )
    return samples, truncated_at


def estimate_limit(seq: Callable[[float], float], sched: Schedule) -> LimitEstimate:
    """
    Estimate lim seq(p) for p -> infinity along a schedule

    Args:
        seq: Function of p
        sched: Sampling points and convergence settings

    Returns:
        LimitEstimate: Aitken-extrapolated value, converged when the last
        min_consecutive extrapolated deltas are below tol; PLUS_INFINITY /
        MINUS_INFINITY for monotone divergence

    Raises:
        LimitEvaluationError: If seq fails at a schedule point (overflow only
        truncates the schedule)
    """
    samples, truncated_at = _sample(seq, sched)
    return _estimate_from_samples(samples, sched, truncated_at=truncated_at)


def _require_admissible(m: CostModel, g: GrowthFunction, sched: Schedule) -> None:
    if not admissible(m.constraint, g, sched):
        raise ModelError(
            f"growth {g.name!r} is not admissible for model {m.name!r} "
            f"({m.constraint.kind.value} constraint)"
        )


def ratio_limit(m: CostModel, g: GrowthFunction, sched: Schedule) -> LimitEstimate:
    """Limit of T_par(p, g(p)) / T_ser(g(p))"""
    _require_admissible(m, g, sched)
    return estimate_limit(lambda p: m.time_ratio(p, g(p)), sched)


def exponent_at_ratio(ratio: float, boundary_tol: float = 0.0) -> ExponentValue:
    """
    Exponent of parallelism for a time ratio, or NOT_APPLICABLE

    Ratios in (1/2, 1/2 + boundary_tol] count as lying on the minimal
    condition boundary, where F = -1.
    """
    if ratio <= 0.5:
        return exponent_from_ratio(ratio)
    if ratio <= 0.5 + boundary_tol:
        return -1.0
    return Outcome.NOT_APPLICABLE


def exponent_limit(m: CostModel, g: GrowthFunction, sched: Schedule,
                   boundary_tol: Optional[float] = None) -> LimitEstimate:
    """
    Limit of the exponent of parallelism along g

    Points violating the minimal condition are skipped; the estimate uses
    the run of applicable points at the tail of the schedule. Fewer than
    six such points gives NOT_APPLICABLE.
    """
    _require_admissible(m, g, sched)
    boundary = sched.tol if boundary_tol is None else boundary_tol
    ratios, truncated_at = _sample(lambda p: m.time_ratio(p, g(p)), sched)

    points = [(p, exponent_at_ratio(ratio, boundary)) for p, ratio in ratios]
    skipped = tuple(p for p, value in points if value is Outcome.NOT_APPLICABLE)

    tail: List[Tuple[float, float]] = []
    for p, value in reversed(points):
        if value is Outcome.NOT_APPLICABLE:
            break
        tail.append((p, value))
    tail.reverse()

    if len(tail) < MIN_SCHEDULE_POINTS:
        logger.info(
            f"[LIMIT] Exponent along {g.name!r} not applicable for {m.name!r} "
            f"({len(skipped)} of {len(points)} points violate the minimal condition)"
        )
        return LimitEstimate(Outcome.NOT_APPLICABLE, False, math.inf,
                             tuple(ratios), skipped, truncated_at)
    clamped = tuple(p for p, ratio in ratios if p >= tail[0][0] and ratio > 0.5)
    if clamped:
        logger.info(f"[LIMIT] {len(clamped)} points along {g.name!r} for {m.name!r} "
                    f"lie on the minimal condition boundary")
    return _estimate_from_samples(tail, sched, skipped, truncated_at, clamped)


def growth_ratio_limit(g: GrowthFunction, sched: Schedule) -> GrowthRatioEstimate:
    """
    Limit of g(p)/p, classified as a finite positive ratio, an infinite
    ratio, or rejected (tends to 0, negative, or undecided)
    """
    limit = estimate_limit(lambda p: g(p) / p, sched)
    if limit.value is Outcome.PLUS_INFINITY:
        kind = GrowthKind.INFINITE_RATIO
    elif limit.is_finite and limit.converged and limit.value > sched.tol:
        kind = GrowthKind.FINITE_RATIO
    else:
        kind = GrowthKind.REJECTED
    return GrowthRatioEstimate(limit, kind)
