"""Numerical lab for the radial combined-power nonlinear Schroedinger equation

    i u_t + Lap u = lambda1 |u|^p1 u + lambda2 |u|^p2 u,   x in R^N, N >= 3,

in the physical frame and in the pseudoconformal lens frame.
"""

from .errors import (
    DomainError,
    GridMismatchError,
    LabError,
    NonContractionError,
    ParameterError,
    SolverError,
)
from .radial import ModelParams, RadialField, RadialGrid, gaussian, make_grid

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "GridMismatchError",
    "LabError",
    "ModelParams",
    "NonContractionError",
    "ParameterError",
    "RadialField",
    "RadialGrid",
    "SolverError",
    "__version__",
    "gaussian",
    "make_grid",
]
