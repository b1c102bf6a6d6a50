"""Action of the scattering matrix on Gaussian states of the sphere.

A sphere Gaussian state with parameters (x0, xi0, Gamma0, Q0) is

    phi(xhat) = chi(|xhat - xi0| / h^{1/3}) Q0((xhat - xi0)/sqrt h)
                exp(-i x0.xhat / h) exp(-(xhat - xi0).Gamma0 (xhat - xi0)/2h).

It is the reflected incoming far-field profile of the packet centred at x0
with momentum xi0, width Gamma0^{-1} and polynomial P, where P_{Gamma0^{-1}} = Q0.
Following that packet through the potential gives the image state, up to a
phase exp(i delta1 / h) and an O(h^{1/2}) remainder.

On the unit sphere the states satisfy

    phi[x + s xi, xi, Gamma + i s, Q] = exp(-i s / h) phi[x, xi, Gamma, Q],

so the centre is only defined up to sliding along the ray.  Outputs are
normalized so that x1.xi1 = x0.xi0; with V = 0 this returns the input
parameters unchanged and delta1 = 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import DEFAULT_TOL, escape_times, scattering_map
from .errors import OffShell, ValidationError
from .fourier import fourier_gaussian_poly, inverse_fourier_gaussian_poly
from .matrices import ComplexSymMatrix, as_matrix
from .poly import MultiPoly
from .potential import Potential
from .sphere import eval_state
from .wavepacket import WavePacket, free_evolve, propagate_full

SHELL_TOL = 1e-10
CORRESPONDENCE_TOL = 1e-6


@dataclass(frozen=True)
class SphereCotangent:
    omega: np.ndarray
    eta: np.ndarray


def sphere_coords(x, xi) -> SphereCotangent:
    """(omega, eta) = (xi, x - (x.xi) xi)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    xi = np.asarray(xi, dtype=float).reshape(-1)
    if abs(np.linalg.norm(xi) - 1.0) > SHELL_TOL:
        raise OffShell(f"|xi| = {np.linalg.norm(xi)!r}, expected 1")
    return SphereCotangent(xi.copy(), x - (x @ xi) * xi)


@dataclass(frozen=True)
class SphereGaussianState:
    x0: np.ndarray
    xi0: np.ndarray
    gamma0: ComplexSymMatrix
    q0: MultiPoly
    h: float

    def __post_init__(self):
        x0 = np.asarray(self.x0, dtype=float).reshape(-1)
        xi0 = np.asarray(self.xi0, dtype=float).reshape(-1)
        if abs(np.linalg.norm(xi0) - 1.0) > SHELL_TOL:
            raise OffShell(f"|xi0| = {np.linalg.norm(xi0)!r}, expected 1")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "xi0", xi0)
        object.__setattr__(self, "gamma0", as_matrix(self.gamma0))
        if not self.h > 0:
            raise ValidationError("h must be positive")
        if not (x0.size == xi0.size == self.gamma0.dim == self.q0.dim):
            raise ValidationError("inconsistent state dimensions")

    @property
    def dim(self) -> int:
        return self.x0.size

    def __call__(self, xhat, cutoff: bool = True):
        return eval_state(self, xhat, cutoff=cutoff)

    def coords(self) -> SphereCotangent:
        return sphere_coords(self.x0, self.xi0)

    def slide(self, s: float) -> "SphereGaussianState":
        """Parameters of exp(i s/h) times this state with the centre moved by s along xi0."""
        return SphereGaussianState(self.x0 + s * self.xi0, self.xi0,
                                   self.gamma0.shift(1j * s), self.q0, self.h)

    def packet(self) -> WavePacket:
        """The packet at x0 whose reflected incoming profile is this state."""
        gamma = self.gamma0.inv()
        poly = inverse_fourier_gaussian_poly(self.q0, gamma)
        return WavePacket(self.x0, self.xi0, gamma, poly, 0.0, self.h)


@dataclass(frozen=True)
class ScatteringResult:
    delta1: float
    state: SphereGaussianState
    diagnostics: dict = field(default_factory=dict)

    def image(self, xhat, cutoff: bool = True):
        """exp(i delta1/h) times the output state: the leading-order S_h image."""
        return np.exp(1j * self.delta1 / self.state.h) * self.state(xhat, cutoff=cutoff)


def apply_scattering_matrix(state: SphereGaussianState, potential: Potential,
                            tol: float = DEFAULT_TOL, t_max: float | None = None) -> ScatteringResult:
    """Leading-order image of a sphere Gaussian state under S_h.

    Pipeline: packet at x0 from (Gamma0, Q0); free evolution back to x_- on
    the incoming ray; propagation through V for time t_+; the outgoing
    packet's far-field data give (x_+, xi_+, Gamma_+^{-1}, (pi_0)_{Gamma_+});
    finally the centre slides along the outgoing ray to x1.xi1 = x0.xi0.

    With phi_- the phase of the packet at x_- and phi_+ the propagated one,
    delta1 = phi_+ + (t_+ - t_-)/2, i.e. the action along the trajectory plus
    t_+/2 minus the change of x.xi between x_- and x_+.
    """
    if potential.dim != state.dim:
        raise ValidationError("state and potential dimensions differ")
    esc = escape_times(state.x0, state.xi0, potential, tol=tol, t_max=t_max)
    u0 = state.packet()
    u_minus = free_evolve(u0, -esc.t_minus)
    prop = propagate_full(u_minus, esc.t_plus, potential, tol=tol)
    u_plus = prop.packet
    xi_plus = u_plus.xi / np.linalg.norm(u_plus.xi)
    shell_defect = abs(float(np.linalg.norm(u_plus.xi)) - 1.0)
    s = float(state.x0 @ state.xi0 - u_plus.x @ xi_plus)
    gamma1 = u_plus.gamma.inv().shift(1j * s)
    q1 = fourier_gaussian_poly(u_plus.poly, u_plus.gamma)
    delta1 = u_plus.phase + 0.5 * (esc.t_plus - esc.t_minus)
    out = SphereGaussianState(u_plus.x + s * xi_plus, xi_plus, gamma1, q1, state.h)
    c1 = out.coords()
    diag = {
        "t_minus": esc.t_minus,
        "t_plus": esc.t_plus,
        "x_minus": u_minus.x,
        "x_plus": u_plus.x,
        "xi_plus": u_plus.xi,
        "slide": s,
        "omega1": c1.omega,
        "eta1": c1.eta,
        "sqrt_det": prop.sqrt_det,
        "shell_defect": shell_defect,
        "symplectic_defect": prop.frame.symplectic_defect(),
    }
    return ScatteringResult(float(delta1), out, diag)


@dataclass(frozen=True)
class CorrespondenceReport:
    omega_in: np.ndarray
    eta_in: np.ndarray
    omega_quantum: np.ndarray
    eta_quantum: np.ndarray
    omega_classical: np.ndarray
    eta_classical: np.ndarray
    discrepancy: float

    @property
    def passed(self) -> bool:
        return self.discrepancy < CORRESPONDENCE_TOL


def verify_correspondence(state: SphereGaussianState, potential: Potential,
                          tol: float = DEFAULT_TOL, t_max: float | None = None) -> CorrespondenceReport:
    """Compare the output centre of apply_scattering_matrix with the scattering map."""
    res = apply_scattering_matrix(state, potential, tol=tol, t_max=t_max)
    c0 = state.coords()
    c1 = res.state.coords()
    img = scattering_map(c0.omega, c0.eta, potential, tol=tol, t_max=t_max)
    disc = float(np.linalg.norm(c1.omega - img.omega) + np.linalg.norm(c1.eta - img.eta))
    return CorrespondenceReport(c0.omega, c0.eta, c1.omega, c1.eta, img.omega, img.eta, disc)
