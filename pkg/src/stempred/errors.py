"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ConfigurationError -> 2,
DataError (and subclasses) -> 3, NumericalAbort -> 4.
"""


class StempredError(Exception):
    """Base class for all package errors."""


class ConfigurationError(StempredError):
    """Invalid configuration: bad keys, incompatible shapes, unknown presets."""


class DataError(StempredError):
    """Problems with input data, corpora, or on-disk artifacts."""


class InputError(DataError):
    """A single invalid input value or argument (bad label, non-finite audio)."""


class CheckpointVersionError(DataError):
    """Checkpoint format version does not match this build."""


class CheckpointCorruptError(DataError):
    """Checkpoint file unreadable or truncated."""


class NumericalAbort(StempredError):
    """Training or loss computation hit a numerical guard (NaN/Inf, zero norms)."""
