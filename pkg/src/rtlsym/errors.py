"""Exception hierarchy shared by every stage of the flow."""

from __future__ import annotations


class RtlsymError(Exception):
    """Base class for tool errors (reported with exit code 1 by the CLI)."""


class LocatedError(RtlsymError):
    """An error tied to a source location."""

    def __init__(self, loc, message: str):
        self.loc = loc
        self.message = message
        super().__init__(self.diagnostic())

    def diagnostic(self) -> str:
        if self.loc is None:
            return f"error: {self.message}"
        return f"{self.loc}: error: {self.message}"


class LexError(LocatedError):
    pass


class ParseError(LocatedError):
    def __init__(self, loc, expected: str, found: str):
        self.expected = expected
        self.found = found
        super().__init__(loc, f"expected {expected}, found {found}")


class ElabError(LocatedError):
    pass


class WidthError(RtlsymError):
    pass


class MissingVar(RtlsymError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"assignment has no value for {name!r}")


class ExternalSolverError(RtlsymError):
    pass


class HarnessError(RtlsymError):
    pass


class OscillationError(RtlsymError):
    pass


class SettleDivergence(RtlsymError):
    pass


class VectorError(RtlsymError):
    pass


class DesignMismatch(RtlsymError):
    pass
