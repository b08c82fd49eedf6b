"""Exception types raised across the package."""


class HodgeDecError(Exception):
    """Base class for all package errors."""


class InvalidGeometryError(HodgeDecError, ValueError):
    """Grid extents or spacing outside the valid range."""


class DegreeError(HodgeDecError, ValueError):
    """Cell degree outside 0..m (or the operator's valid subrange)."""


class InvalidInputError(HodgeDecError, ValueError):
    """Array shape, channel count, or dimension not accepted by an operation."""


class ParameterError(HodgeDecError, ValueError):
    """Numeric parameter outside its documented range."""


class BuildError(HodgeDecError, RuntimeError):
    """An operator could not be assembled from the given supports."""


class SolverError(HodgeDecError, RuntimeError):
    """Iterative solver failed to converge; carries residual diagnostics."""

    def __init__(self, message: str, iterations: int = -1, residual: float = float("nan")):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual
