"""Exception hierarchy shared by the lab modules."""


class LabError(Exception):
    """Base class for all lab errors."""


class ParameterError(LabError, ValueError):
    """Invalid user-supplied parameter."""


class DomainError(LabError, ValueError):
    """Argument outside the domain where an operation is defined."""


class GridMismatchError(LabError, ValueError):
    """Two fields live on different grids."""


class SolverError(LabError, RuntimeError):
    """A numerical solver failed to produce a result."""


class NonContractionError(SolverError):
    """A fixed-point iteration diverged."""
