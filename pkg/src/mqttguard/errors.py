"""Exception types raised by the toolkit.

Everything derives from :class:`MqttGuardError` so callers can catch the
whole family at once. Data-shaped problems (bad CSV cells, unknown classes,
degenerate class counts) are distinguished from usage problems (bad
hyperparameters, mismatched dimensions) by subclass.
"""


class MqttGuardError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(MqttGuardError):
    """Invalid or unknown run-configuration content."""


# --- data ingestion -------------------------------------------------------

class MissingColumnError(MqttGuardError):
    """A required column (target or schema feature) is absent."""


class ParseError(MqttGuardError):
    """A cell could not be parsed as required.

    Carries the zero-based data-row index (header excluded) and the
    column name of the first offending cell.
    """

    def __init__(self, row: int, column: str, message: str = "unparseable cell"):
        super().__init__(f"row {row}, column {column!r}: {message}")
        self.row = row
        self.column = column


class EmptyDatasetError(MqttGuardError):
    """The input contains a header but zero data rows."""


class UnknownClassError(MqttGuardError):
    """A requested class name never occurs in the dataset."""


# --- preprocessing --------------------------------------------------------

class DegenerateClassError(MqttGuardError):
    """A class has too few rows for the requested operation."""


class SchemaMismatchError(MqttGuardError):
    """Column names or kinds differ from what a fitted component expects."""


# --- feature selection ----------------------------------------------------

class SingleClassError(MqttGuardError):
    """An operation that needs >= 2 classes received only one."""


class RankDeficientError(MqttGuardError):
    """Total variance is exactly zero; no principal directions exist."""


class InsufficientFeaturesError(MqttGuardError):
    """Fewer distinct feature names available than requested."""


# --- models ---------------------------------------------------------------

class InvalidHyperparameterError(MqttGuardError):
    """A hyperparameter value is outside its valid range."""


class DimensionMismatchError(MqttGuardError):
    """Prediction input width differs from the fitted feature width."""


class NotFittedError(MqttGuardError):
    """predict/transform called before fit."""


# --- evaluation -----------------------------------------------------------

class LengthMismatchError(MqttGuardError):
    """Paired label vectors have different lengths."""


class CodeOutOfRangeError(MqttGuardError):
    """A class code falls outside [0, n_classes)."""


class EmptyMatrixError(MqttGuardError):
    """A metric was requested on a confusion matrix with zero total count."""


class FoldTooSmallError(MqttGuardError):
    """A class has fewer rows than the requested number of folds."""


# --- serialization --------------------------------------------------------

class VersionMismatchError(MqttGuardError):
    """A model document carries an unsupported format version."""


class MalformedDocumentError(MqttGuardError):
    """A model document is empty, truncated, or structurally invalid."""


# --- synthetic data -------------------------------------------------------

class InvalidSpecError(MqttGuardError):
    """Synthetic-dataset specification is out of range."""
