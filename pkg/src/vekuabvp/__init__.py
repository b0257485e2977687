"""Singular-integral solvers for semi-linear Vekua and Poisson boundary problems on the disk."""
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
