"""Exception hierarchy shared by every module."""


class TspError(Exception):
    """Base class for all package errors."""


class DataError(TspError):
    """Bad or unreadable input data."""


class InstanceParseError(DataError, ValueError):
    def __init__(self, path, lineno, line, reason="expected 'x,y'"):
        self.path = path
        self.lineno = lineno
        self.line = line
        super().__init__(f"{path}:{lineno}: cannot parse {line!r} ({reason})")


class InstanceTooSmallError(DataError, ValueError):
    pass


class InvalidCycleError(TspError, ValueError):
    pass


class LengthMismatchError(TspError, ValueError):
    pass


class DomainError(TspError, ValueError):
    pass


class ConfigError(TspError, ValueError):
    pass


class ResourceLimitError(TspError, MemoryError):
    pass
