"""Exception hierarchy shared by the fitting, inference and CLI layers."""


class EstimationError(Exception):
    """Base class for numerical failures raised by this package."""


class SingularMatrixError(EstimationError):
    """A linear system could not be solved, even after ridge jitter."""


class HullViolationError(EstimationError):
    """Zero lies outside the convex hull of the estimating functions."""


class NoConvergenceError(EstimationError):
    """An iterative solver hit its iteration cap or diverged."""


class LogDomainError(EstimationError):
    """A log-likelihood term 1 + lambda'g_i fell outside (0, inf)."""


class RankDeficientError(EstimationError):
    """Complete-case design matrix is not of full column rank."""


class InsufficientCompleteCasesError(EstimationError):
    """Fewer observed responses than parameters to estimate."""


class DegenerateSampleError(EstimationError):
    """Sample statistic undefined (e.g. zero mean absolute deviation)."""


class OneSidedSampleError(EstimationError):
    """All residuals share one sign; no interior expectile level exists."""


class CsvSchemaError(EstimationError):
    """Input file does not conform to the dataset CSV schema."""


class InvalidProbabilityError(ValueError):
    """Probability argument outside (0, 1)."""


class NonpositiveBandwidthError(ValueError):
    """Bandwidth must be strictly positive."""
