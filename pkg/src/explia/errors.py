"""Exception types raised across the pipeline."""


class ExpliaError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(ExpliaError):
    """Bad or unknown configuration key/value."""


class SchemaError(ExpliaError):
    """Column layout does not match the expected feature schema."""


class UnknownLabelError(ExpliaError):
    """Label strings not present in the taxonomy."""

    def __init__(self, offenders):
        self.offenders = sorted(set(offenders))
        super().__init__(f"labels not in taxonomy: {', '.join(self.offenders)}")


class EmptyInputError(ExpliaError):
    """An operation that requires rows received none."""


class ParameterError(ExpliaError):
    """Parameter value outside its valid range for the given data."""


class CannotInterpolateError(ExpliaError):
    """SMOTE needs at least two rows in a group to interpolate."""


class StratificationError(ExpliaError):
    """A stratum is too small to split under stratification."""


class DegenerateLabelError(ExpliaError):
    """Training labels contain a single class (pass allow_constant to permit)."""


class MethodMismatchError(ExpliaError):
    """Operation applied to a model kind it does not support."""


class BudgetError(ExpliaError):
    """Exact enumeration requested beyond the feature budget."""


class KernelWidthError(ExpliaError):
    """All locality weights collapsed to ~0; a larger kernel width is needed."""


class CorruptDocumentError(ExpliaError):
    """Model document is truncated or malformed."""


class VersionError(ExpliaError):
    """Model document version is not supported."""


class SelectionError(ExpliaError):
    """Sample selector referenced a row outside the evaluation set."""


class InstanceMismatchError(ExpliaError):
    """Two explanations claim the same instance but their value hashes differ."""
