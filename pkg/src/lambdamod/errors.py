"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Operands live on different (or malformed) group shapes."""


class BudgetExceeded(RuntimeError):
    """A brute-force enumeration would exceed the configured budget."""


class NotInvariantError(ValueError):
    """A generating set does not span a t-invariant subgroup."""


class PreconditionError(ValueError):
    """An input violates a documented precondition."""
