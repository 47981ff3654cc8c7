"""Boundary Control inverse pipeline for the 1-D wave equation with a
potential on the real line.

Forward side: Goursat kernels, forward solution, response matrix and
connecting operator.  Inverse side: Krein and Gelfand-Levitan potential
reconstruction from response data alone, plus a finite-interval spectral
bridge cross-validating the dynamic representations.
"""

from ._backend import BACKEND
from .grid import Control, StateVector, UniformGrid
from .potentials import (
    ConstantPotential,
    GaussianPotential,
    PolynomialPotential,
    Potential,
    Sech2Potential,
    TabulatedPotential,
    ZeroPotential,
    potential_from_config,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Control",
    "StateVector",
    "UniformGrid",
    "Potential",
    "ZeroPotential",
    "ConstantPotential",
    "GaussianPotential",
    "Sech2Potential",
    "PolynomialPotential",
    "TabulatedPotential",
    "potential_from_config",
    "__version__",
]
