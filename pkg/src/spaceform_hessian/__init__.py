"""Radially symmetric k-Hessian quotient problems in space forms.

Closed-form and shooting solutions of sigma_k(b)/sigma_l(b) = const with
b = Hess u + K u g, the auxiliary P-functions, the Rellich-Pohozaev integral
identities, and property checks for elementary symmetric functions.
"""

from __future__ import annotations

from .exceptions import (
    DomainError,
    NotASolutionError,
    ParameterError,
    PreconditionError,
    ShootingError,
    SingularityError,
)
from .geometry import SpaceForm
from .radial import ProblemParams, RadialSolution, explicit_solution, shot_solution

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "NotASolutionError",
    "ParameterError",
    "PreconditionError",
    "ProblemParams",
    "RadialSolution",
    "ShootingError",
    "SingularityError",
    "SpaceForm",
    "explicit_solution",
    "shot_solution",
]
