"""Exception types raised across the package."""


class SheetCurrentError(Exception):
    """Base class for all package errors."""


class InvalidGridError(SheetCurrentError, ValueError):
    """A partition of [0, 1] violates the node invariants."""


class DomainError(SheetCurrentError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class PreconditionError(SheetCurrentError, ValueError):
    """An input table or configuration breaks a stated precondition."""


class ToleranceError(SheetCurrentError, RuntimeError):
    """A numerical integration did not reach the requested accuracy."""


class ConfigError(SheetCurrentError, ValueError):
    """An experiment configuration could not be parsed or validated."""
