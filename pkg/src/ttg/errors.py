"""Exception types shared across the package.

The CLI maps ``UsageError`` and ``ParseError`` to exit status 2 and
``PropertyFailure`` to exit status 1.
"""


class TTGError(Exception):
    """Base class for all errors raised by ttg."""


class UsageError(TTGError, ValueError):
    """Invalid arguments: dimension mismatch, unknown label, bad option."""


class ParseError(UsageError):
    """Malformed input text, annotated with a 1-based line and column."""

    def __init__(self, message, line=None, column=None, source=None):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        super().__init__(self.__str__())

    def __str__(self):
        where = []
        if self.source:
            where.append(str(self.source))
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.column is not None:
            where.append(f"column {self.column}")
        if where:
            return f"{', '.join(where)}: {self.message}"
        return self.message


class UnsupportedError(TTGError):
    """The input is well formed but outside what the library can compute."""


class NotRigidError(UnsupportedError):
    """Duals were requested in a model that has none."""


class ConsistencyError(TTGError):
    """An internal cross-check failed; indicates a bug, never bad input."""


class PropertyFailure(TTGError):
    """A verified property did not hold; carries the offending report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
