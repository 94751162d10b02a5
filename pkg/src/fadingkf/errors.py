"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid model/scenario configuration (bad dimensions, ranges, schema)."""


class EstimationError(RuntimeError):
    """A statistical estimation step had insufficient or degenerate input."""


class NumericalError(RuntimeError):
    """A numerical operation failed (singular solve, non-finite result)."""


class SearchSpaceError(RuntimeError):
    """The decision or outcome enumeration exceeded its configured cap."""
