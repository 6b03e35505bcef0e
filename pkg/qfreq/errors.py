"""
Typed errors with process exit codes
"""
from typing import Any, Optional

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_INVARIANT = 3


class QFreqError(Exception):
    """Base error: a human readable detail plus the exit code the CLI reports"""

    exit_code: int = EXIT_NUMERIC

    def __init__(self, detail: str, exit_code: Optional[int] = None, **context: Any):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code
        self.context = context

    def __str__(self) -> str:
        if not self.context:
            return self.detail
        extras = ", ".join(f"{key}={value!r}" for key, value in self.context.items())
        return f"{self.detail} ({extras})"


class UsageError(QFreqError):
    exit_code = EXIT_USAGE


class DomainError(QFreqError):
    """Input outside the domain an operation accepts"""
    exit_code = EXIT_USAGE


class NumericError(QFreqError):
    exit_code = EXIT_NUMERIC


class DimensionMismatchError(NumericError):
    pass


class RootFindingError(NumericError):
    pass


class SingularEvaluationError(NumericError):
    pass


class QuadratureError(NumericError):
    pass


class DegenerateHeightError(NumericError):
    pass


class DegenerateRescalingError(NumericError):
    pass


class DegenerateCurveError(NumericError):
    pass


class PreconditionError(NumericError):
    pass


class BarycenterError(PreconditionError):
    pass


class ResolutionError(NumericError):
    pass


class SolverError(NumericError):
    pass


class EnergyIncreaseError(NumericError):
    """The alternating minimizer increased the energy; a logic error"""


class CoveringNonTerminationError(NumericError):
    pass


class CalibrationError(NumericError):
    """The covering constants disagree with the detector"""


class InvariantViolation(QFreqError):
    exit_code = EXIT_INVARIANT
