"""Exception hierarchy shared across the package.

Each class carries the process exit code the command-line front end maps it to.
"""


class WavecsError(Exception):
    exit_code = 2


class ParameterError(WavecsError, ValueError):
    """A parameter is outside its admissible range."""

    exit_code = 1


class DimensionError(ParameterError):
    """Array shapes or lengths are incompatible."""


class DomainError(ParameterError):
    """An operation was asked for an index it is not defined on."""


class UnsupportedError(ParameterError):
    pass


class DataError(WavecsError, ValueError):
    """Input data are malformed or non-finite."""

    exit_code = 2


class ResourceError(WavecsError, RuntimeError):
    """A request exceeds a configured computational limit."""

    exit_code = 3
