"""
Parallelism Classifier Module

Decides whether an implementation is strongly parallel, weakly parallel or
Amdahl-like parallel by estimating the limit of its exponent of
parallelism along a family of growth functions n = g(p):

- strong: some g with g(p)/p -> infinity drives F -> 0
- weak: F -> 0 only along growths with a finite ratio g(p)/p
- Amdahl-like: F tends to a negative limit along every growth tried

Verdicts are relative to the family supplied; a finite family cannot
prove the "for every g" clause, so the result records the family used.
"""

import enum
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from speeduplab.amdahl_core import Outcome, amdahl_limit
from speeduplab.asymptotics import (
    ExponentValue,
    GrowthKind,
    LimitEstimate,
    Schedule,
    estimate_limit,
    exponent_at_ratio,
    exponent_limit,
    growth_ratio_limit,
    ratio_limit,
)
from speeduplab.errors import LimitEvaluationError, SpeedupLabError, UsageError
from speeduplab.model_library import (
    CostModel,
    GrowthFunction,
    admissible,
    default_family,
    model_speedup,
)

logger = logging.getLogger(__name__)

DEFAULT_ZERO_TOLERANCE = 1e-3


class Verdict(str, enum.Enum):
    STRONG = "strong"
    WEAK = "weak"
    AMDAHL_LIKE = "amdahl_like"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class GrowthEvidence:
    """
    What one growth function says about a model

    exponent_limit is present only for admissible, non-rejected growths.
    asymptotic_fraction and asymptotic_speedup follow from a numeric
    exponent limit F: f = 1 + F + F^2/2 and S = 1/(1 - f).
    """

    growth: GrowthFunction
    growth_kind: GrowthKind
    admissible: bool
    growth_ratio: Optional[LimitEstimate] = None
    exponent_limit: Optional[LimitEstimate] = None
    boundary_ratio: Optional[LimitEstimate] = None
    note: str = ""

    @property
    def asymptotic_fraction(self) -> Optional[float]:
        limit = self.exponent_limit
        if limit is None or not limit.is_finite or not limit.converged:
            return None
        exponent = limit.value
        return 1 + exponent + exponent * exponent / 2

    @property
    def asymptotic_speedup(self) -> Union[float, Outcome, None]:
        fraction = self.asymptotic_fraction
        if fraction is None:
            return None
        if fraction >= 1:
            return Outcome.PLUS_INFINITY
        if fraction <= 0:
            return None
        return amdahl_limit(fraction)


@dataclass(frozen=True)
class ClassificationResult:
    verdict: Verdict
    evidence: Tuple[GrowthEvidence, ...]
    zero_tolerance: float
    witnesses: Tuple[str, ...] = ()

    @property
    def family(self) -> Tuple[str, ...]:
        return tuple(item.growth.name for item in self.evidence)


def _tends_to_zero(limit: Optional[LimitEstimate], zero_tolerance: float) -> bool:
    return (
        limit is not None
        and limit.is_finite
        and limit.converged
        and abs(limit.value) <= zero_tolerance
    )


def _boundary_evidence(m: CostModel, g: GrowthFunction, kind: GrowthKind,
                       growth_limit: LimitEstimate, limit: LimitEstimate,
                       sched: Schedule) -> GrowthEvidence:
    """
    Evidence for an exponent limit built from points clamped to F = -1

    The ratio limit is attached so a ratio tending to exactly 1/2 can be
    told apart from one settling just above it.
    """
    note = f"{len(limit.clamped)} points counted on the minimal condition boundary"
    try:
        boundary: Optional[LimitEstimate] = ratio_limit(m, g, sched)
    except SpeedupLabError as e:
        logger.warning(f"[CLASSIFY] Ratio limit along {g.name!r} failed: {e}")
        boundary = None
    if boundary is not None and boundary.is_finite:
        note += f"; T_par/T_ser tends to {boundary.value!r}"
    return GrowthEvidence(g, kind, True, growth_limit, limit, boundary, note=note)


def _collect_evidence(m: CostModel, g: GrowthFunction, sched: Schedule) -> GrowthEvidence:
    try:
        growth = growth_ratio_limit(g, sched)
    except SpeedupLabError as e:
        return GrowthEvidence(g, GrowthKind.REJECTED, False, note=f"growth ratio failed: {e}")

    if growth.kind is GrowthKind.REJECTED:
        # n/p -> 0 or undecided: excluded from classification
        return GrowthEvidence(g, GrowthKind.REJECTED, False, growth.limit,
                              note="ratio n/p does not tend to a positive limit or infinity")

    if not admissible(m.constraint, g, sched):
        return GrowthEvidence(g, growth.kind, False, growth.limit,
                              note=f"not admissible under {m.constraint.kind.value} constraint")

    try:
        limit = exponent_limit(m, g, sched)
    except SpeedupLabError as e:
        logger.warning(f"[CLASSIFY] Exponent limit along {g.name!r} failed: {e}")
        return GrowthEvidence(g, growth.kind, True, growth.limit, note=f"exponent limit failed: {e}")

    if limit.value is Outcome.MINUS_INFINITY:
        return GrowthEvidence(g, GrowthKind.REJECTED, True, growth.limit, limit,
                              note="exponent tends to -infinity")
    if limit.clamped:
        return _boundary_evidence(m, g, growth.kind, growth.limit, limit, sched)
    return GrowthEvidence(g, growth.kind, True, growth.limit, limit)


def _verdict(evidence: Sequence[GrowthEvidence],
             zero_tolerance: float) -> Tuple[Verdict, Tuple[str, ...]]:
    usable = [item for item in evidence if item.admissible and item.growth_kind is not GrowthKind.REJECTED]

    strong = [item.growth.name for item in usable
              if item.growth_kind is GrowthKind.INFINITE_RATIO
              and _tends_to_zero(item.exponent_limit, zero_tolerance)]
    if strong:
        return Verdict.STRONG, tuple(strong)

    weak = [item.growth.name for item in usable
            if item.growth_kind is GrowthKind.FINITE_RATIO
            and _tends_to_zero(item.exponent_limit, zero_tolerance)]
    if weak:
        return Verdict.WEAK, tuple(weak)

    def below_zero(item: GrowthEvidence) -> bool:
        limit = item.exponent_limit
        return (limit is not None and limit.is_finite and limit.converged
                and limit.value < -zero_tolerance)

    if usable and all(below_zero(item) for item in usable):
        return Verdict.AMDAHL_LIKE, tuple(item.growth.name for item in usable)

    return Verdict.INCONCLUSIVE, ()


def classify(m: CostModel, family: Optional[Sequence[GrowthFunction]] = None,
             sched: Optional[Schedule] = None,
             zero_tolerance: float = DEFAULT_ZERO_TOLERANCE) -> ClassificationResult:
    """
    Classify the parallelism of a cost model

    Args:
        m: Cost model
        family: Growth functions to try, default p, p*log(p), p^2, 100*p, p^3
        sched: Limit-estimation schedule, default from settings
        zero_tolerance: |F limit| at or below this counts as "tends to 0"

    Returns:
        ClassificationResult: Verdict (strong, weak, amdahl_like or
        inconclusive) with per-growth evidence in family order
    """
    family = tuple(family) if family is not None else default_family()
    if not family:
        raise UsageError("growth family must not be empty")
    if not zero_tolerance > 0:
        raise UsageError("zero tolerance must be positive")
    sched = sched or Schedule.default()

    logger.info(f"[CLASSIFY] Model {m.name!r} over {len(family)} growth functions")
    evidence = tuple(_collect_evidence(m, g, sched) for g in family)
    verdict, witnesses = _verdict(evidence, zero_tolerance)
    logger.info(f"[CLASSIFY] ✓ {m.name!r}: {verdict.value}"
                + (f" (witnesses: {', '.join(witnesses)})" if witnesses else ""))
    return ClassificationResult(verdict, evidence, zero_tolerance, witnesses)


@dataclass(frozen=True)
class MonotonicityReport:
    """Where dS/dp < 0 along n = g(p)"""

    passed: bool
    violations: Tuple[Tuple[float, float], ...]  # (p, dS/dp)
    samples: Tuple[Tuple[float, float], ...]  # (p, S)


def geometric_grid(p_min: float, p_max: float, points: int) -> List[float]:
    """points values from p_min to p_max with a constant ratio, endpoints exact"""
    if points < 2:
        raise UsageError("a grid needs at least 2 points")
    if not (0 < p_min < p_max and math.isfinite(p_max)):
        raise UsageError(f"invalid grid range [{p_min!r}, {p_max!r}]")
    ratio = math.log(p_max / p_min)
    grid = [p_min * math.exp(ratio * i / (points - 1)) for i in range(points)]
    grid[0], grid[-1] = float(p_min), float(p_max)
    return grid


def monotonicity_check(m: CostModel, g: GrowthFunction,
                       p_range: Tuple[float, float] = (2.0, 2.0 ** 40),
                       step_count: int = 50) -> MonotonicityReport:
    """
    Check dS/dp >= 0 along n = g(p) by central differences on a geometric grid

    A grid point is a violation when the difference quotient is below
    -1e-9 |S|.
    """
    p_lo, p_hi = p_range
    if not (2 <= p_lo < p_hi <= 2.0 ** 40):
        raise UsageError(f"p range must lie within [2, 2^40], got {p_range!r}")
    if step_count < 10:
        raise UsageError("step_count must be >= 10")

    grid = geometric_grid(p_lo, p_hi, step_count)
    speedups = [model_speedup(m, p, g(p)) for p in grid]
    violations = []
    for i in range(1, len(grid) - 1):
        slope = (speedups[i + 1] - speedups[i - 1]) / (grid[i + 1] - grid[i - 1])
        if slope < -1e-9 * abs(speedups[i]):
            violations.append((grid[i], slope))
    if violations:
        logger.info(f"[CLASSIFY] Speedup of {m.name!r} decreases along {g.name!r} "
                    f"from p={violations[0][0]:g}")
    return MonotonicityReport(not violations, tuple(violations), tuple(zip(grid, speedups)))


def exponent_curve(m: CostModel, g: GrowthFunction, sched: Schedule,
                   boundary_tol: Optional[float] = None) -> List[Tuple[float, ExponentValue]]:
    """F along n = g(p) at each schedule point, NOT_APPLICABLE where the minimal condition fails"""
    boundary = sched.tol if boundary_tol is None else boundary_tol
    return [(p, exponent_at_ratio(m.time_ratio(p, g(p)), boundary)) for p in sched.p_values]


class FixedDimensionKind(str, enum.Enum):
    COLLAPSES = "collapses"
    AMDAHL_APPLICABLE = "amdahl_applicable"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class FixedDimensionResult:
    n: float
    kind: FixedDimensionKind
    ratio_limit: LimitEstimate

    @property
    def saturated_speedup(self) -> Optional[float]:
        if self.kind is not FixedDimensionKind.AMDAHL_APPLICABLE:
            return None
        return 1 / self.ratio_limit.value


def fixed_dimension_behaviour(m: CostModel, n: float,
                              sched: Optional[Schedule] = None) -> FixedDimensionResult:
    """
    Behaviour of T_par(p,n)/T_ser(n) for p -> infinity with n held constant

    An unbounded ratio means the speedup collapses to 0 (typical of strongly
    parallel implementations); a finite positive limit means Amdahl's law
    applies with saturated speedup 1/limit (typical of weakly parallel ones).
    """
    sched = sched or Schedule.default()
    try:
        limit = estimate_limit(lambda p: m.time_ratio(p, n), sched)
    except LimitEvaluationError as e:
        logger.warning(f"[CLASSIFY] Fixed-dimension ratio failed for {m.name!r}: {e}")
        raise
    if limit.value is Outcome.PLUS_INFINITY:
        kind = FixedDimensionKind.COLLAPSES
    elif limit.is_finite and limit.converged and limit.value > 0:
        kind = FixedDimensionKind.AMDAHL_APPLICABLE
    else:
        kind = FixedDimensionKind.INCONCLUSIVE
    return FixedDimensionResult(float(n), kind, limit)


def _limit_value(value: Any) -> Any:
    if isinstance(value, Outcome):
        return value.value
    return value


def limit_to_dict(limit: Optional[LimitEstimate]) -> Optional[Dict[str, Any]]:
    if limit is None:
        return None
    return {
        "value": _limit_value(limit.value),
        "converged": limit.converged,
        "residual": limit.residual if math.isfinite(limit.residual) else None,
        "skipped_points": len(limit.skipped),
        "truncated_at": limit.truncated_at,
        "clamped_points": len(limit.clamped),
    }


def classification_to_dict(result: ClassificationResult) -> Dict[str, Any]:
    """JSON-ready rendering of a classification"""
    evidence = []
    for item in result.evidence:
        evidence.append({
            "growth": item.growth.name,
            "kind": item.growth_kind.value,
            "admissible": item.admissible,
            "growth_ratio": limit_to_dict(item.growth_ratio),
            "exponent_limit": limit_to_dict(item.exponent_limit),
            "boundary_ratio": limit_to_dict(item.boundary_ratio),
            "asymptotic_fraction": item.asymptotic_fraction,
            "asymptotic_speedup": _limit_value(item.asymptotic_speedup),
            "note": item.note,
        })
    return {
        "verdict": result.verdict.value,
        "witnesses": list(result.witnesses),
        "zero_tolerance": result.zero_tolerance,
        "family": list(result.family),
        "evidence": evidence,
    }
