"""Exception hierarchy shared across the toolkit.

Everything raised on bad data, bad files, or bad configuration derives from
NatcmdError so callers (and the CLI) can catch one base type.
"""


class NatcmdError(Exception):
    """Base class for all natcmd errors."""


class DatasetError(NatcmdError):
    """Invalid dataset contents or an unusable dataset file."""


class ParseError(DatasetError):
    """A file could not be parsed; the message names the offending line."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TrainingError(NatcmdError):
    """Training preconditions violated (single class, bad features, ...)."""


class ModelError(NatcmdError):
    """Model file could not be read, or its schema is invalid."""


class MetricError(NatcmdError):
    """Metric undefined for the given inputs (e.g. empty confusion matrix)."""


class VoiceError(NatcmdError):
    """Bad embedding table, command list, or similarity input."""


class StreamError(NatcmdError):
    """A stream runner could not continue."""
