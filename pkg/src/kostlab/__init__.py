"""Kostlan random polynomial maps on spheres and their jet singularities."""
from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
