"""
Cost Model Library

Cost models T_par(p,n) as first-class objects, growth functions n = g(p),
growth constraints, the model-file format and the bundled models
(trapezoid rule, FFT, matrix-vector product).

T_ser is T_par(1,n) unless the model carries an explicit serial
expression in n (needed for the FFT, whose parallel time A log2 n says
nothing about the serial time B n log2 n).
"""

import dataclasses
import enum
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Annotated, Any, Dict, Iterable, Literal, Mapping, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, ValidationError, field_validator

from speeduplab.amdahl_core import Exponent, Speedup, exponent_from_ratio
from speeduplab.errors import (
    EvaluationDomainError,
    ModelError,
    ModelFileError,
    SpeedupLabError,
)
from speeduplab.expr_core import Bindings, Expr, evaluate, free_identifiers, parse, unparse

logger = logging.getLogger(__name__)

MODELS_DIR = Path(__file__).parent / "models"
BUNDLED_MODEL_NAMES: Tuple[str, ...] = ("trapezoid", "matvec", "fft")

# Growth functions every classification tries unless told otherwise
DEFAULT_FAMILY: Tuple[str, ...] = ("p", "p*log(p)", "p^2", "100*p", "p^3")


class ConstraintKind(str, enum.Enum):
    FREE = "free"
    LINEAR_IN_P = "linear_in_p"


@dataclass(frozen=True)
class GrowthConstraint:
    """How a model allows its problem dimension to grow with p"""

    kind: ConstraintKind = ConstraintKind.FREE
    k: Optional[float] = None  # elements per processor, LINEAR_IN_P only

    def __post_init__(self):
        if self.kind is ConstraintKind.LINEAR_IN_P:
            if self.k is None or not (math.isfinite(self.k) and self.k > 0):
                raise ModelError(f"linear_in_p constraint needs a positive k, got {self.k!r}")
        elif self.k is not None:
            raise ModelError("only linear_in_p constraints take k")

    @classmethod
    def free(cls) -> "GrowthConstraint":
        return cls(ConstraintKind.FREE)

    @classmethod
    def linear_in_p(cls, k: float) -> "GrowthConstraint":
        return cls(ConstraintKind.LINEAR_IN_P, float(k))


@dataclass(frozen=True)
class GrowthFunction:
    """A prescribed problem dimension n = g(p)"""

    name: str
    g: Expr
    constants: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        unknown = free_identifiers(self.g) - {"p"} - set(self.constants)
        if unknown:
            raise ModelError(
                f"growth function {self.name!r} references unbound names: {', '.join(sorted(unknown))}"
            )

    def __call__(self, p: float) -> float:
        return evaluate(self.g, Bindings(p=p, constants=self.constants))


def growth_function(source: str, constants: Optional[Mapping[str, float]] = None,
                    name: Optional[str] = None) -> GrowthFunction:
    """
    Build a growth function from an expression in p

    Args:
        source: Expression such as "p^2" or "k*p"
        constants: Values for named constants in the expression
        name: Display name, defaults to the source text
    """
    return GrowthFunction(name or source, parse(source), dict(constants or {}))


def k_times_p(k: float) -> GrowthFunction:
    return growth_function("k*p", {"k": float(k)}, name=f"{k:g}*p")


def power_of_p(alpha: float) -> GrowthFunction:
    return growth_function("p^alpha", {"alpha": float(alpha)}, name=f"p^{alpha:g}")


def default_family() -> Tuple[GrowthFunction, ...]:
    return tuple(growth_function(source) for source in DEFAULT_FAMILY)


def check_increasing(g: GrowthFunction, p_values: Sequence[float]) -> bool:
    """
    Check numerically that g is strictly increasing over p_values

    Logs a warning when g(p) < p somewhere: fewer data than processors
    wastes hardware.
    """
    values = [g(p) for p in p_values]
    below = [p for p, n in zip(p_values, values) if n < p]
    if below:
        logger.warning(f"[MODEL] Growth {g.name!r} gives n < p at p={below[0]:g}")
    return all(b > a for a, b in zip(values, values[1:]))


@dataclass(frozen=True)
class CostModel:
    """A parametric parallel execution time T_par(p,n) with its constants"""

    name: str
    t_par: Expr
    constants: Mapping[str, float]
    constraint: GrowthConstraint = field(default_factory=GrowthConstraint.free)
    t_ser: Optional[Expr] = None

    def __post_init__(self):
        known = {"p", "n"} | set(self.constants)
        unknown = free_identifiers(self.t_par) - known
        if unknown:
            raise ModelError(
                f"model {self.name!r}: t_par references unbound names: {', '.join(sorted(unknown))}"
            )
        if self.t_ser is not None:
            serial_names = free_identifiers(self.t_ser)
            if "p" in serial_names:
                raise ModelError(f"model {self.name!r}: t_ser must not depend on p")
            unknown = serial_names - known
            if unknown:
                raise ModelError(
                    f"model {self.name!r}: t_ser references unbound names: {', '.join(sorted(unknown))}"
                )
        for key, value in self.constants.items():
            if not math.isfinite(value):
                raise ModelError(f"model {self.name!r}: constant {key} is not finite")

    def parallel_time(self, p: float, n: float) -> float:
        return evaluate(self.t_par, Bindings(p=p, n=n, constants=self.constants))

    def serial_time(self, n: float) -> float:
        if self.t_ser is not None:
            return evaluate(self.t_ser, Bindings(p=1.0, n=n, constants=self.constants))
        return self.parallel_time(1.0, n)

    def time_ratio(self, p: float, n: float) -> float:
        """T_par(p,n) / T_ser(n)"""
        t_par = self.parallel_time(p, n)
        t_ser = self.serial_time(n)
        if t_par <= 0 or t_ser <= 0:
            raise EvaluationDomainError(
                f"model {self.name!r} gives non-positive time at p={p!r}, n={n!r} "
                f"(T_par={t_par!r}, T_ser={t_ser!r})"
            )
        return t_par / t_ser

    def with_constants(self, **overrides: float) -> "CostModel":
        return dataclasses.replace(self, constants={**self.constants, **overrides})

    def scaled(self, factor: float) -> "CostModel":
        """Same model with every constant multiplied by factor"""
        return dataclasses.replace(
            self, constants={key: value * factor for key, value in self.constants.items()}
        )


def model_speedup(m: CostModel, p: float, n: float) -> Speedup:
    """
    Speedup of a cost model, T_ser(n) / T_par(p,n)

    Raises:
        EvaluationDomainError: If p <= 1, n < 1 or either time is non-positive
        EvaluationError: Propagated from expression evaluation
    """
    if not p > 1:
        raise EvaluationDomainError(f"speedup needs p > 1, got {p!r}")
    return 1 / m.time_ratio(p, n)


def model_exponent(m: CostModel, p: float, n: float) -> Exponent:
    """
    Exponent of parallelism of a cost model,
    F = -1 + sqrt(1 - 2 T_par(p,n)/T_par(1,n))

    Raises:
        MinimalConditionViolated: If the time ratio exceeds 1/2 (carries the ratio)
    """
    if not p > 1:
        raise EvaluationDomainError(f"exponent needs p > 1, got {p!r}")
    return exponent_from_ratio(m.time_ratio(p, n))


def admissible(constraint: GrowthConstraint, g: GrowthFunction, sched: Any = None) -> bool:
    """
    Whether a growth function is allowed by a model's growth constraint

    Free admits every increasing g; LinearInP additionally needs g(p)/p to
    converge to a finite positive limit.
    """
    # Imported here: asymptotics depends on this module.
    from speeduplab.asymptotics import GrowthKind, Schedule, growth_ratio_limit

    sched = sched or Schedule.default()
    try:
        if not check_increasing(g, sched.p_values):
            return False
        if constraint.kind is ConstraintKind.FREE:
            return True
        return growth_ratio_limit(g, sched).kind is GrowthKind.FINITE_RATIO
    except SpeedupLabError as e:
        logger.info(f"[MODEL] Growth {g.name!r} not admissible: {e}")
        return False


# Model files

class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class FreeConstraintSpec(_Strict):
    kind: Literal["free"]


class LinearInPConstraintSpec(_Strict):
    kind: Literal["linear_in_p"]
    k: PositiveFloat


ConstraintSpec = Annotated[
    Union[FreeConstraintSpec, LinearInPConstraintSpec], Field(discriminator="kind")
]


class ModelFileSpec(_Strict):
    """Schema of a model file; unknown fields are rejected"""

    name: str
    t_par: str
    t_ser: Optional[str] = None
    constants: Dict[str, float] = Field(default_factory=dict)
    constraint: ConstraintSpec = Field(default_factory=lambda: FreeConstraintSpec(kind="free"))

    @field_validator("constants")
    @classmethod
    def _finite_constants(cls, value: Dict[str, float]) -> Dict[str, float]:
        for key, constant in value.items():
            if not math.isfinite(constant):
                raise ValueError(f"constant {key} must be finite")
        return value


def model_from_spec(spec: ModelFileSpec) -> CostModel:
    if isinstance(spec.constraint, LinearInPConstraintSpec):
        constraint = GrowthConstraint.linear_in_p(spec.constraint.k)
    else:
        constraint = GrowthConstraint.free()
    try:
        return CostModel(
            name=spec.name,
            t_par=parse(spec.t_par),
            constants=dict(spec.constants),
            constraint=constraint,
            t_ser=parse(spec.t_ser) if spec.t_ser is not None else None,
        )
    except SpeedupLabError as e:
        raise ModelFileError(f"Invalid model {spec.name!r}: {e}") from e


def model_from_dict(data: Mapping[str, Any]) -> CostModel:
    """Validate a decoded model file and build the model"""
    try:
        spec = ModelFileSpec.model_validate(data)
    except ValidationError as e:
        raise ModelFileError(f"Invalid model file: {e}") from e
    return model_from_spec(spec)


def model_to_dict(m: CostModel) -> Dict[str, Any]:
    """Render a model in the model-file format"""
    if m.constraint.kind is ConstraintKind.LINEAR_IN_P:
        constraint: Dict[str, Any] = {"kind": "linear_in_p", "k": m.constraint.k}
    else:
        constraint = {"kind": "free"}
    return {
        "name": m.name,
        "t_par": unparse(m.t_par),
        "t_ser": unparse(m.t_ser) if m.t_ser is not None else None,
        "constants": dict(m.constants),
        "constraint": constraint,
    }


def load_model_file(path: Union[str, Path]) -> CostModel:
    """
    Load a JSON model file

    Raises:
        ModelFileError: If the file is missing, not JSON, or fails the schema
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ModelFileError(f"Model file not found: {path}")
    except (OSError, json.JSONDecodeError) as e:
        raise ModelFileError(f"Cannot read model file {path}: {e}") from e
    model = model_from_dict(data)
    logger.info(f"[MODEL] ✓ Loaded model {model.name!r} from {path}")
    return model


def load_bundled_model(name: str) -> CostModel:
    if name not in BUNDLED_MODEL_NAMES:
        raise ModelFileError(
            f"Unknown bundled model {name!r} (choose from {', '.join(BUNDLED_MODEL_NAMES)})"
        )
    return load_model_file(MODELS_DIR / f"{name}.json")


def resolve_model(name_or_path: str) -> CostModel:
    """A bundled model by name, otherwise a model file path"""
    if name_or_path in BUNDLED_MODEL_NAMES:
        return load_bundled_model(name_or_path)
    return load_model_file(name_or_path)


def iter_bundled_models() -> Iterable[CostModel]:
    for name in BUNDLED_MODEL_NAMES:
        yield load_bundled_model(name)
