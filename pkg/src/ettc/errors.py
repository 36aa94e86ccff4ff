"""Exceptions shared across the library."""


class EttcError(Exception):
    """Base class for all library-specific errors."""


class IndexCollision(EttcError):
    """Raised when multiplying terms whose index occurrences would clash."""

    def __init__(self, index: str):
        self.index = index
        super().__init__(f"index collision on {index!r}")


class MalformedTerm(EttcError):
    """Raised when a term violates the occurrence discipline."""


class MalformedFormula(EttcError):
    """Raised when a formula violates the occurrence/binding discipline."""


class MalformedJudgement(EttcError):
    """Raised when a sequent/judgement violates the index matching relation."""


class RuleViolation(EttcError):
    """Raised when a proof rule is applied outside its side conditions."""


class ParseError(EttcError):
    """Raised by the surface-syntax readers."""
