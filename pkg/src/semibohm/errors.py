"""Exception types shared across the package."""


class NumericalAbort(FloatingPointError):
    """A computation produced non-finite values and was stopped."""


class CausticError(ValueError):
    """A single-phase construction was asked for a point on or past a caustic."""


class ConfigError(ValueError):
    """Invalid scenario configuration."""
