"""Exception hierarchy shared by all moodbridge modules.

The CLI maps these onto process exit codes: ConfigError -> 2,
DataError / ShapeError -> 3, NumericError -> 4.
"""


class MoodBridgeError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(MoodBridgeError):
    """Invalid experiment configuration (bad key, missing file, bad value)."""


class DataError(MoodBridgeError):
    """Malformed or inconsistent input data.

    Carries optional path/line context for parse failures.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:"
            if line is not None:
                prefix += f"{line}:"
            prefix += " "
        super().__init__(prefix + message)


class ShapeError(MoodBridgeError):
    """Dimension or structure mismatch between numerical objects."""


class NumericError(MoodBridgeError):
    """Numerical failure: NaN/Inf produced, zero norm where one is required."""


class UnsupportedOperation(MoodBridgeError):
    """Operation not defined for this strategy kind."""
