"""
Exception hierarchy for SpeedupLab

Every error raised by the library derives from SpeedupLabError so entry
points (CLI, HTTP API) can map whole families to exit codes / status codes.
"""

from typing import Iterable, List, Optional, Sequence, Tuple


class SpeedupLabError(Exception):
    """Base class for all SpeedupLab errors"""
    pass


class ConfigurationError(SpeedupLabError):
    """Raised when configuration values are invalid"""
    pass


class UsageError(SpeedupLabError):
    """Raised when a command is invoked with inconsistent arguments"""
    pass


# Expressions

class ExprSyntaxError(SpeedupLabError):
    """Raised when an expression cannot be parsed"""

    def __init__(self, offset: int, message: str):
        self.offset = offset
        self.message = message
        super().__init__(f"{message} (at offset {offset})")


class UnknownFunctionError(ExprSyntaxError):
    """Raised when an expression calls a function that does not exist"""
    pass


class EvaluationError(SpeedupLabError):
    """Raised when an expression cannot be evaluated"""
    pass


class UnboundIdentifierError(EvaluationError):
    """Raised when an identifier has no binding"""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Unbound identifier: {name}")


class EvaluationDomainError(EvaluationError):
    """Raised when an operation is applied outside its domain"""
    pass


class NonFiniteResultError(EvaluationError):
    """Raised when evaluation overflows or produces a non-finite value"""
    pass


# Speedup algebra and models

class AmdahlDomainError(SpeedupLabError):
    """Raised when a speedup-algebra precondition is violated"""
    pass


class MinimalConditionViolated(SpeedupLabError):
    """Raised when T_par(p,n) > T_par(1,n)/2, so the exponent approximation is not real"""

    def __init__(self, ratio: float):
        self.ratio = ratio
        super().__init__(
            f"Minimal condition of parallelism violated: ratio {ratio!r} > 0.5"
        )


class ModelError(SpeedupLabError):
    """Raised when a cost model or growth function is invalid"""
    pass


class ModelFileError(ModelError):
    """Raised when a model file cannot be read or fails validation"""
    pass


class LimitEvaluationError(SpeedupLabError):
    """Raised when a sequence cannot be evaluated at a schedule point"""

    def __init__(self, p: float, reason: str):
        self.p = p
        self.reason = reason
        super().__init__(f"Evaluation failed at p={p!r}: {reason}")


# Measurement data

class DataError(SpeedupLabError):
    """Raised when measurement data is unusable"""
    pass


class MeasurementFileError(DataError):
    """Raised when a measurement CSV is malformed"""

    def __init__(self, message: str, row_errors: Optional[Sequence[Tuple[int, str]]] = None):
        self.row_errors: List[Tuple[int, str]] = list(row_errors or [])
        details = "; ".join(f"line {line}: {reason}" for line, reason in self.row_errors)
        super().__init__(f"{message}: {details}" if details else message)


class InsufficientSamplesError(DataError):
    """Raised when there are fewer samples than coefficients to fit"""
    pass


class RankDeficientError(DataError):
    """Raised when the design matrix does not have full column rank"""
    pass


class MissingBaselineError(DataError):
    """Raised when a problem dimension has no p=1 baseline measurement"""

    def __init__(self, dimensions: Iterable[int]):
        self.dimensions = sorted(dimensions)
        super().__init__(
            f"Missing p=1 baseline for n = {', '.join(str(n) for n in self.dimensions)}"
        )
