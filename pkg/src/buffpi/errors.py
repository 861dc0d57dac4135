"""Exceptions shared across the workbench."""


class BuffpiError(Exception):
    """Base class for workbench errors."""


class InvalidStore(BuffpiError):
    pass


class NoMatch(BuffpiError):
    def __init__(self, index: int, pattern=None):
        super().__init__(f"no transition matches pattern #{index}: {pattern}")
        self.index = index
        self.pattern = pattern


class LabelMismatch(BuffpiError):
    pass


class CapacityExceeded(BuffpiError):
    pass


class ArityMismatch(BuffpiError):
    pass


class NotFromEncoding(BuffpiError):
    pass


class UnsupportedFeature(BuffpiError):
    pass


class UnknownVar(BuffpiError):
    pass


class GuardDiverged(BuffpiError):
    pass


class GuardNonBoolean(BuffpiError):
    pass


class UnknownSuite(BuffpiError):
    pass


class ParseError(BuffpiError):
    def __init__(self, message: str, line: int = 1, column: int = 1, expected=()):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.expected = tuple(expected)
