"""Generalized eigenfunctions of the massless Dirac-Coulomb operator.

Modules:
    specfun    complex log-gamma, Kummer 1F1, spherical Bessel functions
    eigenwave  radial eigenfunctions psi_k(rho) with several backends
    quadrep    direct quadrature of the finite-interval integral representation
    saddle     steepest-descent contours for large rho
    envelope   numerical check of the pointwise and dyadic bounds
    spectral   relativistic Hankel transform, propagator, Strichartz scans
    cli        command-line driver
"""

__version__ = "0.1.0"

from .errors import (AccuracyError, ConstructionError, DiracWaveError, DivergenceError,
                     DomainError, RangeError, VerificationError)
from .eigenwave import ChannelParams, make_channel, psi, psi_array, evaluate

__all__ = [
    "__version__", "AccuracyError", "ConstructionError", "DiracWaveError", "DivergenceError",
    "DomainError", "RangeError", "VerificationError", "ChannelParams", "make_channel", "psi",
    "psi_array", "evaluate",
]
