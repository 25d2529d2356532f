"""Exception types raised across the package."""


class TreeShiftError(Exception):
    """Base class for all package errors."""


class SlotOutOfRange(TreeShiftError, ValueError):
    pass


class RootHasNoParent(TreeShiftError, ValueError):
    pass


class EnumerationCapExceeded(TreeShiftError, RuntimeError):
    def __init__(self, cap, what="vertices"):
        super().__init__(f"more than {cap} {what} would be enumerated")
        self.cap = cap


class NotApplicable(TreeShiftError, ValueError):
    pass


class NotADescendant(TreeShiftError, ValueError):
    pass


class UnboundedOperator(TreeShiftError, ValueError):
    pass


class CriterionNotMetWithinTruncation(TreeShiftError, RuntimeError):
    """A chain builder could not push its dual sum past 1/delta within n_max levels.

    ``best`` holds the largest t (or s) value that was reached.
    """

    def __init__(self, message, best, levels):
        super().__init__(message)
        self.best = best
        self.levels = levels
