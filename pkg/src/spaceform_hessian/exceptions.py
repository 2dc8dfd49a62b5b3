"""Exception types raised across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """A radius (or similar argument) lies outside the admissible range."""


class SingularityError(ValueError):
    """A quantity has no finite limit at the pole."""


class ParameterError(ValueError):
    """Problem parameters do not admit the requested construction."""


class PreconditionError(ValueError):
    """An operation was called on data violating its precondition."""


class ShootingError(RuntimeError):
    """The shooting iteration found no root in the admissible range."""


class NotASolutionError(PreconditionError):
    """An identity check was requested for a profile that does not solve the PDE."""
