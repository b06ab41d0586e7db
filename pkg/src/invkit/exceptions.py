"""Exception types raised by invkit."""


class InvkitError(Exception):
    """Base class for all invkit errors."""


class NumericalFailure(InvkitError):
    """The LP solver could not certify optimality, infeasibility or unboundedness."""


class EmptySetError(InvkitError):
    """An operation needed a non-empty polytope and got an empty one."""


class UnboundedError(InvkitError):
    """A polytope is unbounded in a direction where a finite value was required."""


class ShapeMismatch(InvkitError, ValueError):
    pass


class OriginExcluded(InvkitError, ValueError):
    """A constraint or disturbance set does not contain the origin."""


class VertexBudgetExceeded(InvkitError):
    pass


class IterationCapExceeded(InvkitError):
    pass


class RowCapExceeded(InvkitError):
    """Explicit backward-reachable-set construction would exceed the row cap."""
