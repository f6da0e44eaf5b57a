"""Exception types; the CLI maps them onto its exit codes."""


class LionetError(Exception):
    """Base class for errors raised by this package."""


class DataError(LionetError):
    """Bad or missing input data (CLI exit code 2)."""


class ModelFormatError(DataError):
    """A model container is truncated, corrupted or from another version."""


class ConfigMismatchError(ModelFormatError):
    """A loaded model's architecture differs from what the caller expected."""


class StatsMismatchError(DataError):
    """Normalization statistics differ from the ones the model was trained with."""


class NumericalError(LionetError):
    """Non-finite values during training or inference (CLI exit code 3)."""
