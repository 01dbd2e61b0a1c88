"""Lower-bound machinery for minimax estimation of Lp norms and related
functionals of multivariate densities."""
from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
