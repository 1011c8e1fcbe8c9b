"""Exception types shared across the lab."""


class ConfigError(ValueError):
    """Invalid configuration, shapes or dimensions."""


class NumericError(ArithmeticError):
    """Non-finite values where finite ones are required."""


class UsageError(RuntimeError):
    """An operation was called in a state that does not permit it."""


class DomainError(ValueError):
    """Arguments outside the mathematical domain of an operation."""


class DegenerateNormalizerError(DomainError):
    """The bias normalizer (mean true Q-value) is numerically zero."""
