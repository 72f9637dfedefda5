"""Exception hierarchy shared by every pipeline stage.

Each exception carries an optional ``stage`` tag and a ``counters`` dict so the
CLI can emit a structured error report.  ``exit_code`` maps onto the CLI exit
statuses (2 validation, 3 resource cap, 4 check failure).
"""

from __future__ import annotations


class GkzError(Exception):
    exit_code = 1

    def __init__(self, message: str, *, stage: str | None = None, counters: dict | None = None):
        super().__init__(message)
        self.stage = stage
        self.counters = dict(counters or {})

    def report(self) -> dict:
        return {
            "error": type(self).__name__,
            "message": str(self),
            "stage": self.stage,
            "counters": self.counters,
        }


class ValidationError(GkzError):
    exit_code = 2


class ParseError(ValidationError):
    def __init__(self, message: str, offset: int, text: str = "", **kw):
        super().__init__(f"{message} at byte {offset}", **kw)
        self.offset = offset
        self.text = text


class UnknownSymbolError(ParseError):
    def __init__(self, name: str, offset: int, text: str = "", **kw):
        super().__init__(f"unknown symbol {name!r}", offset, text, **kw)
        self.name = name


class DimensionError(ValidationError):
    pass


class NonHolonomicError(ValidationError):
    pass


class FrameError(ValidationError):
    pass


class DenominatorVanishingError(ValidationError):
    pass


class ResonanceError(ValidationError):
    pass


class MultiplicityError(ValidationError):
    """The secondary equation has more than one independent rational solution."""


class ResourceLimitError(GkzError):
    exit_code = 3


class NoSolutionError(ResourceLimitError):
    """No rational solution was found within the configured ansatz caps."""


class CheckFailure(GkzError):
    exit_code = 4
