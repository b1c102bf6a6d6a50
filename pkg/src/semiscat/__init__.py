"""Semiclassical scattering of Gaussian states.

Classical scattering data, Gaussian wave packet propagation, the leading-order
action of the scattering matrix on Gaussian states of the sphere, and grid
oracles to check them.
"""
from .dynamics import (PhasePoint, VariationalFrame, action_integral, escape_times, flow,
                       scattering_map, variational_frame)
from .errors import DomainError, SemiscatError, ValidationError
from .fourier import fourier_gaussian_poly, inverse_fourier_gaussian_poly
from .matrices import ComplexSymMatrix
from .poly import MultiPoly
from .potential import Potential, free_potential, make_potential
from .smatrix import (ScatteringResult, SphereGaussianState, apply_scattering_matrix,
                      sphere_coords, verify_correspondence)
from .wavepacket import WavePacket, farfield_future, farfield_past, free_evolve, propagate

__version__ = "0.1.0"

__all__ = [
    "ComplexSymMatrix", "DomainError", "MultiPoly", "PhasePoint", "Potential",
    "ScatteringResult", "SemiscatError", "SphereGaussianState", "ValidationError",
    "VariationalFrame", "WavePacket", "action_integral", "apply_scattering_matrix",
    "escape_times", "farfield_future", "farfield_past", "flow", "fourier_gaussian_poly",
    "free_evolve", "free_potential", "inverse_fourier_gaussian_poly", "make_potential",
    "propagate", "scattering_map", "sphere_coords", "variational_frame",
    "verify_correspondence",
]
