"""Exception types. Each carries the CLI exit code it maps to."""


class GaitrelError(Exception):
    exit_code = 1


class UsageError(GaitrelError):
    exit_code = 1


class IoError(GaitrelError, OSError):
    exit_code = 2


class InvalidInput(GaitrelError, ValueError):
    exit_code = 3


class FormatError(GaitrelError, ValueError):
    exit_code = 4


class ParseError(FormatError):
    """Malformed input file; message carries the file path and line number."""

    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {message}")
