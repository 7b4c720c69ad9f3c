"""Orthogonal polynomials with q-rational recurrence coefficients and the
zero-temperature-quench Glauber chain they diagonalize."""
from .errors import (DivergenceError, DomainError, NumericalError, PoleError, QIsingError,
                     QuadratureError, SizeError, TruncationError)
from .ising import (ChainModel, magnetization, magnetization_asymptotic, magnetization_kernel,
                    magnetization_matrix, stationary, twospin, twospin_asymptotic, twospin_kernel)
from .measure import OrthoMeasure, build_measure, find_zeros, orthogonality_residual
from .orthopoly import PolyFamily, poly_recurrence, poly_spectral, psi, tau_from_z, wronskian
from .qseries import QTriple, SeriesResult, phi_rs, qpoch

__version__ = "0.1.0"

__all__ = [
    "QIsingError", "DomainError", "PoleError", "DivergenceError", "NumericalError",
    "QuadratureError", "TruncationError", "SizeError",
    "QTriple", "SeriesResult", "qpoch", "phi_rs",
    "PolyFamily", "poly_recurrence", "poly_spectral", "psi", "tau_from_z", "wronskian",
    "OrthoMeasure", "build_measure", "find_zeros", "orthogonality_residual",
    "ChainModel", "magnetization", "magnetization_kernel", "magnetization_matrix",
    "magnetization_asymptotic", "twospin", "twospin_kernel", "twospin_asymptotic", "stationary",
]
