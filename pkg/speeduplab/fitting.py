"""
Fitting Module

Recovers cost-model constants from measured (p, n, time) triples by
linear least squares, computes the empirical exponent of parallelism
against p=1 baselines, and reads/writes the measurement CSV format:

    p,n,time_seconds
    1,1024,0.51
    4,1024,0.13

Only templates linear in their constants are supported.
"""

import csv
import io
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, TextIO, Tuple, Union

import numpy as np

from speeduplab.amdahl_core import Outcome, exponent_from_ratio
from speeduplab.asymptotics import Schedule
from speeduplab.classifier import DEFAULT_ZERO_TOLERANCE, ClassificationResult, classify
from speeduplab.errors import (
    DataError,
    InsufficientSamplesError,
    MeasurementFileError,
    MinimalConditionViolated,
    MissingBaselineError,
    ModelError,
    RankDeficientError,
)
from speeduplab.expr_core import (
    BinaryOp,
    Bindings,
    Constant,
    Expr,
    evaluate,
    free_identifiers,
    parse,
    unparse,
)
from speeduplab.model_library import CostModel, GrowthConstraint, GrowthFunction

logger = logging.getLogger(__name__)

MEASUREMENT_HEADER = ("p", "n", "time_seconds")
CONDITION_LIMIT = 1e8


@dataclass(frozen=True)
class TimingSample:
    """One measured execution time"""

    p: int
    n: int
    time: float

    def __post_init__(self):
        if isinstance(self.p, bool) or not isinstance(self.p, int) or self.p < 1:
            raise DataError(f"p must be a positive integer, got {self.p!r}")
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise DataError(f"n must be a positive integer, got {self.n!r}")
        if not (math.isfinite(self.time) and self.time > 0):
            raise DataError(f"time must be positive and finite, got {self.time!r}")


@dataclass(frozen=True)
class ModelTemplate:
    """
    Coefficient-free shape of a cost model

    T_par(p,n) = sum(constant_i * basis_i). When serial_basis is given the
    serial time is sum(serial_constant_j * serial_basis_j) in n only; the
    parallel basis is then fitted on p > 1 samples and the serial basis
    on p = 1 samples.
    """

    name: str
    basis: Tuple[Expr, ...]
    constant_names: Tuple[str, ...]
    serial_basis: Tuple[Expr, ...] = ()
    serial_constant_names: Tuple[str, ...] = ()
    constraint: GrowthConstraint = field(default_factory=GrowthConstraint.free)

    def __post_init__(self):
        if not self.basis:
            raise ModelError(f"template {self.name!r} has no basis functions")
        if len(self.basis) != len(self.constant_names):
            raise ModelError(f"template {self.name!r}: basis and constant names differ in length")
        if len(self.serial_basis) != len(self.serial_constant_names):
            raise ModelError(
                f"template {self.name!r}: serial basis and constant names differ in length"
            )
        names = list(self.constant_names) + list(self.serial_constant_names)
        if len(set(names)) != len(names):
            raise ModelError(f"template {self.name!r}: duplicate constant names")
        for term in self.basis:
            if free_identifiers(term) - {"p", "n"}:
                raise ModelError(f"template {self.name!r}: basis {unparse(term)!r} uses names other than p, n")
        for term in self.serial_basis:
            if free_identifiers(term) - {"n"}:
                raise ModelError(f"template {self.name!r}: serial basis {unparse(term)!r} must depend on n only")

    @property
    def has_serial_form(self) -> bool:
        return bool(self.serial_basis)


def template(name: str, terms: Mapping[str, str],
             serial_terms: Optional[Mapping[str, str]] = None,
             constraint: Optional[GrowthConstraint] = None) -> ModelTemplate:
    """
    Build a template from {constant name: basis expression}

    Example:
        template("trapezoid", {"a": "n/p", "b": "log(p)"})
    """
    serial_terms = serial_terms or {}
    return ModelTemplate(
        name=name,
        basis=tuple(parse(source) for source in terms.values()),
        constant_names=tuple(terms),
        serial_basis=tuple(parse(source) for source in serial_terms.values()),
        serial_constant_names=tuple(serial_terms),
        constraint=constraint or GrowthConstraint.free(),
    )


BUNDLED_TEMPLATES: Dict[str, ModelTemplate] = {
    "trapezoid": template("trapezoid", {"a": "n/p", "b": "log(p)"}),
    "matvec": template("matvec", {"a": "(2*n^2 - n)/p", "b": "n^2 + n"}),
    "fft": template(
        "fft",
        {"A": "log2(n)"},
        serial_terms={"B": "n*log2(n)"},
        constraint=GrowthConstraint.linear_in_p(100),
    ),
}


def get_template(name: str) -> ModelTemplate:
    try:
        return BUNDLED_TEMPLATES[name]
    except KeyError:
        raise ModelError(
            f"Unknown template {name!r} (choose from {', '.join(BUNDLED_TEMPLATES)})"
        )


@dataclass(frozen=True)
class FitResult:
    template: str
    constants: Dict[str, float]
    residual_norm: float
    r_squared: float
    condition_warning: bool
    condition_number: float
    negative_constants: Tuple[str, ...] = ()
    sample_count: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "template": self.template,
            "constants": dict(self.constants),
            "residual_norm": self.residual_norm,
            "r_squared": self.r_squared,
            "condition_warning": self.condition_warning,
            "condition_number": self.condition_number,
            "negative_constants": list(self.negative_constants),
            "sample_count": self.sample_count,
        }


@dataclass(frozen=True)
class _Solution:
    coefficients: np.ndarray
    residuals: np.ndarray
    observed: np.ndarray
    condition_number: float


def _design_matrix(basis: Sequence[Expr], samples: Sequence[TimingSample]) -> np.ndarray:
    return np.array(
        [[evaluate(term, Bindings(p=float(s.p), n=float(s.n))) for term in basis] for s in samples],
        dtype=float,
    )


def _solve(basis: Sequence[Expr], samples: Sequence[TimingSample], label: str) -> _Solution:
    if len(samples) < len(basis):
        raise InsufficientSamplesError(
            f"{label}: {len(samples)} samples for {len(basis)} coefficients"
        )
    a = _design_matrix(basis, samples)
    y = np.array([s.time for s in samples], dtype=float)

    rank = np.linalg.matrix_rank(a)
    if rank < len(basis):
        raise RankDeficientError(
            f"{label}: design matrix has rank {rank}, need {len(basis)}"
        )

    # Solve R x = Q^T y
    q, r = np.linalg.qr(a)
    coefficients = np.linalg.solve(r, q.T @ y)
    residuals = y - a @ coefficients
    return _Solution(coefficients, residuals, y, float(np.linalg.cond(a)))


def fit(tmpl: ModelTemplate, samples: Sequence[TimingSample]) -> FitResult:
    """
    Least-squares fit of a template's constants

    Args:
        tmpl: Model template
        samples: Measurements

    Returns:
        FitResult: Constants, residual 2-norm in seconds, R^2 (clipped to
        [0, 1]), and a warning flag when the design matrix condition number
        exceeds 1e8

    Raises:
        InsufficientSamplesError: Fewer samples than coefficients
        RankDeficientError: Basis functions are not independent on the samples
    """
    samples = list(samples)
    if tmpl.has_serial_form:
        parallel_samples = [s for s in samples if s.p > 1]
        serial_samples = [s for s in samples if s.p == 1]
        solutions = [
            (tmpl.constant_names, _solve(tmpl.basis, parallel_samples, f"{tmpl.name} parallel")),
            (tmpl.serial_constant_names,
             _solve(tmpl.serial_basis, serial_samples, f"{tmpl.name} serial")),
        ]
    else:
        solutions = [(tmpl.constant_names, _solve(tmpl.basis, samples, tmpl.name))]

    constants: Dict[str, float] = {}
    for names, solution in solutions:
        constants.update(zip(names, (float(c) for c in solution.coefficients)))

    residuals = np.concatenate([solution.residuals for _, solution in solutions])
    observed = np.concatenate([solution.observed for _, solution in solutions])
    residual_norm = float(np.linalg.norm(residuals))
    total = float(np.sum((observed - observed.mean()) ** 2))
    if total == 0:
        r_squared = 1.0 if residual_norm == 0 else 0.0
    else:
        r_squared = min(1.0, max(0.0, 1 - float(np.sum(residuals ** 2)) / total))

    condition_number = max(solution.condition_number for _, solution in solutions)
    condition_warning = condition_number > CONDITION_LIMIT
    if condition_warning:
        logger.warning(f"[FIT] Ill-conditioned design matrix for {tmpl.name!r} "
                       f"(condition number {condition_number:.3g})")

    negative = tuple(name for name, value in constants.items() if value < 0)
    if negative:
        logger.warning(f"[FIT] Negative fitted constants for {tmpl.name!r}: {', '.join(negative)}")

    logger.info(f"[FIT] ✓ {tmpl.name}: {constants} (residual {residual_norm:.3g} s, R^2 {r_squared:.6f})")
    return FitResult(
        template=tmpl.name,
        constants=constants,
        residual_norm=residual_norm,
        r_squared=r_squared,
        condition_warning=condition_warning,
        condition_number=condition_number,
        negative_constants=negative,
        sample_count=len(samples),
    )


def _weighted_sum(names: Sequence[str], basis: Sequence[Expr]) -> Expr:
    terms = [BinaryOp("*", Constant(name), term) for name, term in zip(names, basis)]
    return reduce(lambda left, right: BinaryOp("+", left, right), terms)


def model_from_fit(tmpl: ModelTemplate, result: FitResult) -> CostModel:
    """Cost model sum(constant_i * basis_i) with the fitted constants"""
    t_ser = None
    if tmpl.has_serial_form:
        t_ser = _weighted_sum(tmpl.serial_constant_names, tmpl.serial_basis)
    return CostModel(
        name=f"{tmpl.name} (fitted)",
        t_par=_weighted_sum(tmpl.constant_names, tmpl.basis),
        constants=dict(result.constants),
        constraint=tmpl.constraint,
        t_ser=t_ser,
    )


def fit_then_classify(tmpl: ModelTemplate, samples: Sequence[TimingSample],
                      family: Optional[Sequence[GrowthFunction]] = None,
                      sched: Optional[Schedule] = None,
                      zero_tolerance: float = DEFAULT_ZERO_TOLERANCE) -> ClassificationResult:
    """Fit the template, then classify the fitted model"""
    result = fit(tmpl, samples)
    return classify(model_from_fit(tmpl, result), family, sched, zero_tolerance)


ExponentPoint = Tuple[int, int, Union[float, Outcome]]


def empirical_exponent(samples: Sequence[TimingSample]) -> List[ExponentPoint]:
    """
    Exponent of parallelism of every p > 1 measurement against its p = 1 baseline

    Repeated baselines for one n are averaged. Ratios above 1/2 give
    Outcome.NOT_APPLICABLE.

    Raises:
        MissingBaselineError: Lists every n measured at p > 1 without a baseline
    """
    baselines: Dict[int, List[float]] = defaultdict(list)
    for s in samples:
        if s.p == 1:
            baselines[s.n].append(s.time)

    missing = {s.n for s in samples if s.p > 1 and s.n not in baselines}
    if missing:
        raise MissingBaselineError(missing)

    points: List[ExponentPoint] = []
    for s in samples:
        if s.p == 1:
            continue
        baseline = baselines[s.n]
        reference = baseline[0] if len(baseline) == 1 else sum(baseline) / len(baseline)
        try:
            value: Union[float, Outcome] = exponent_from_ratio(s.time / reference)
        except MinimalConditionViolated:
            value = Outcome.NOT_APPLICABLE
        points.append((s.p, s.n, value))
    return points


def synthesize_samples(m: CostModel, p_values: Iterable[int], n_values: Iterable[int],
                       noise: float = 0.0, seed: int = 0) -> List[TimingSample]:
    """
    Timings predicted by a cost model on a (p, n) grid

    p = 1 rows carry the serial time. With noise > 0 every time is
    multiplied by 1 + noise * N(0, 1) drawn from numpy's default_rng(seed).
    """
    if not (math.isfinite(noise) and 0 <= noise < 1):
        raise DataError(f"noise must lie in [0, 1), got {noise!r}")
    rng = np.random.default_rng(seed)
    n_values = list(n_values)
    samples = []
    for p in p_values:
        for n in n_values:
            time = m.serial_time(float(n)) if p == 1 else m.parallel_time(float(p), float(n))
            if noise:
                time *= 1 + noise * rng.standard_normal()
            samples.append(TimingSample(int(p), int(n), float(time)))
    logger.info(f"[FIT] Synthesized {len(samples)} samples from {m.name!r} (noise {noise:g}, seed {seed})")
    return samples


def _parse_row(row: List[str]) -> TimingSample:
    if len(row) != len(MEASUREMENT_HEADER):
        raise ValueError(f"expected {len(MEASUREMENT_HEADER)} fields, got {len(row)}")
    p_text, n_text, time_text = (value.strip() for value in row)
    try:
        p, n = int(p_text), int(n_text)
    except ValueError:
        raise ValueError(f"p and n must be integers, got {p_text!r}, {n_text!r}")
    time = float(time_text)
    if p < 1 or n < 1 or not time > 0:
        raise ValueError("values must be positive")
    return TimingSample(p, n, time)


def parse_measurements(stream: TextIO) -> List[TimingSample]:
    """
    Read measurements in the p,n,time_seconds CSV format

    Raises:
        MeasurementFileError: Wrong header, or one or more invalid rows
        (every bad row is reported with its line number)
    """
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or tuple(value.strip() for value in header) != MEASUREMENT_HEADER:
        raise MeasurementFileError(
            f"Expected header '{','.join(MEASUREMENT_HEADER)}', got "
            f"{','.join(header) if header else 'an empty file'!r}"
        )

    samples: List[TimingSample] = []
    row_errors: List[Tuple[int, str]] = []
    for row in reader:
        if not row:
            continue
        try:
            samples.append(_parse_row(row))
        except (ValueError, DataError) as e:
            row_errors.append((reader.line_num, str(e)))
    if row_errors:
        raise MeasurementFileError("Invalid measurement rows", row_errors)
    if not samples:
        raise MeasurementFileError("Measurement file has no samples")
    return samples


def read_measurements_csv(path: Union[str, Path]) -> List[TimingSample]:
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as f:
            samples = parse_measurements(f)
    except FileNotFoundError:
        raise MeasurementFileError(f"Measurement file not found: {path}")
    except UnicodeDecodeError as e:
        raise MeasurementFileError(f"Measurement file {path} is not UTF-8: {e}")
    logger.info(f"[FIT] Read {len(samples)} samples from {path}")
    return samples


def format_measurements(samples: Iterable[TimingSample]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(MEASUREMENT_HEADER)
    for s in samples:
        writer.writerow([s.p, s.n, repr(s.time)])
    return buffer.getvalue()


def write_measurements_csv(samples: Iterable[TimingSample], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(format_measurements(samples), encoding="utf-8")
    return path
