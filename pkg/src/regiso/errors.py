"""Exception types shared by all modules."""


class RegisoError(Exception):
    """Base class for errors raised by regiso."""


class EmptyLanguage(RegisoError):
    """The automaton accepts no word where a nonempty language is required."""


class ResourceLimit(RegisoError):
    """A configured size cap was exceeded."""


class InvalidInput(RegisoError):
    """Input is malformed or violates a precondition."""


class OutOfRange(RegisoError):
    """An index lies outside the valid range."""
