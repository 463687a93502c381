"""Ground-state thermodynamics of the anisotropic XY chain in a transverse field."""

from xychain.errors import DivergenceError, DomainError, ToleranceError

__version__ = "0.1.0"

__all__ = ["DivergenceError", "DomainError", "ToleranceError", "__version__"]
