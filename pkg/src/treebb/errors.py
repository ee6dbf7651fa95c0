"""Exception types shared across the package."""


class TreebbError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(TreebbError, ValueError):
    """A point or coefficient vector has the wrong length."""


class InfeasiblePointError(TreebbError, ValueError):
    """A point violates the constraints it was required to satisfy."""


class EmptyRegionError(TreebbError, RuntimeError):
    """A subregion could not produce a sample: no witness and rejection
    sampling exhausted its budget.  Callers treat this as "allocate zero"."""


class FeasibleSetTooLarge(TreebbError, RuntimeError):
    """Enumeration stopped because the feasible set exceeds the given limit."""

    def __init__(self, limit):
        super().__init__(f"feasible set exceeds enumeration limit {limit}")
        self.limit = limit


class InternalConsistencyError(TreebbError, RuntimeError):
    """An invariant that must hold by construction was violated."""
