"""Exception hierarchy shared by all shiftlab modules."""


class ShiftlabError(Exception):
    """Base class for every error raised by shiftlab."""


class InvalidSft(ShiftlabError, ValueError):
    """The transition matrix is malformed or violates a standing assumption."""


class NotPrimitive(InvalidSft):
    """No power of the transition matrix up to the Wielandt bound is positive."""


class SymbolOutOfRange(ShiftlabError, ValueError):
    pass


class ConvergenceFailure(ShiftlabError, RuntimeError):
    pass


class BudgetExceeded(ShiftlabError, RuntimeError):
    pass


class WindowOverlap(ShiftlabError, ValueError):
    pass


class WordTooShort(ShiftlabError, ValueError):
    pass


class InsufficientWordLength(ShiftlabError, RuntimeError):
    """A run-length answer depends on symbols beyond the end of the word."""


class EmptyRegime(ShiftlabError, ValueError):
    """The requested level set is empty, so there is nothing to construct."""


class SeedSearchFailure(ShiftlabError, RuntimeError):
    pass


class DepthExceeded(ShiftlabError, IndexError):
    pass


class InvalidPair(ShiftlabError, ValueError):
    pass


class ConstructionError(ShiftlabError, ValueError):
    """Parameters are outside the domain a Cantor construction supports."""
