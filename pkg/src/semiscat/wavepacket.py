"""Gaussian-times-polynomial wave packets and their semiclassical propagation.

A packet with centre x0, momentum xi0, width matrix Gamma, polynomial P,
scalar phase delta and semiclassical parameter h is the function

    u(x) = exp(i delta / h) P((x - x0)/sqrt(h)) exp(i x.xi0 / h)
           exp(-(x - x0).Gamma (x - x0) / 2h).

Note the plane wave is exp(i x.xi0/h), not exp(i (x - x0).xi0/h); the phase
bookkeeping below depends on it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import DEFAULT_TOL, PhasePoint, VariationalFrame, integrate
from .errors import CausticError, OffShell, UnsupportedOrder, ValidationError
from .fourier import fourier_gaussian_poly
from .matrices import ComplexSymMatrix, as_matrix, sqrt_det_analytic
from .poly import MultiPoly
from .potential import Potential

SHELL_TOL = 1e-10


@dataclass(frozen=True)
class WavePacket:
    x: np.ndarray
    xi: np.ndarray
    gamma: ComplexSymMatrix
    poly: MultiPoly
    phase: float
    h: float

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).reshape(-1))
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=float).reshape(-1))
        object.__setattr__(self, "gamma", as_matrix(self.gamma))
        if not self.h > 0:
            raise ValidationError("h must be positive")
        d = self.x.size
        if self.xi.size != d or self.gamma.dim != d or self.poly.dim != d:
            raise ValidationError("inconsistent packet dimensions")

    @property
    def dim(self) -> int:
        return self.x.size

    @classmethod
    def gaussian(cls, x, xi, gamma, h, poly: Optional[MultiPoly] = None, phase: float = 0.0):
        d = np.asarray(x).size
        return cls(x, xi, gamma, poly if poly is not None else MultiPoly.constant(d), phase, h)

    def __call__(self, pts):
        """Evaluate at points of shape (..., d)."""
        pts = np.asarray(pts, dtype=float)
        y = pts - self.x
        quad = np.einsum("...i,ij,...j->...", y, self.gamma.a, y)
        lin = pts @ self.xi
        sq = np.sqrt(self.h)
        return (np.exp(1j * self.phase / self.h) * self.poly(y / sq)
                * np.exp(1j * lin / self.h - quad / (2 * self.h)))

    def norm(self) -> float:
        """L^2 norm from Gauss-Hermite quadrature of the Gaussian moments (exact)."""
        d = self.dim
        deg = max(int(self.poly.degree()), 0) if not self.poly.is_zero() else 0
        n = deg + 2
        nodes, weights = np.polynomial.hermite.hermgauss(n)
        chol = np.linalg.cholesky(self.gamma.a.real)
        grids = np.meshgrid(*([nodes] * d), indexing="ij")
        z = np.stack([g.ravel() for g in grids], axis=-1)
        w = np.prod(np.stack(np.meshgrid(*([weights] * d), indexing="ij"), axis=-1)
                    .reshape(-1, d), axis=-1)
        y = np.linalg.solve(chol.T, z.T).T
        integral = np.sum(w * np.abs(self.poly(y)) ** 2) / np.prod(np.diag(chol))
        return float(np.sqrt(self.h ** (d / 2) * integral))

    def conj(self) -> "WavePacket":
        """Packet for the complex conjugate function."""
        return WavePacket(self.x, -self.xi, self.gamma.conj(), self.poly.conj(), -self.phase, self.h)

    def on_shell(self) -> bool:
        return abs(np.linalg.norm(self.xi) - 1.0) <= SHELL_TOL


def free_evolve(packet: WavePacket, t: float) -> WavePacket:
    """Exact free Schrodinger evolution exp(i t h Laplacian / 2) of a packet."""
    d = packet.dim
    g = packet.gamma
    shifted = g.inv().shift(1j * t)          # Gamma^{-1} + i t Id
    new_gamma = shifted.inv()
    img = fourier_gaussian_poly(fourier_gaussian_poly(packet.poly, g), shifted)
    new_poly = img.reflect() * (2 * np.pi) ** (-d)
    return WavePacket(packet.x + t * packet.xi, packet.xi, ComplexSymMatrix(new_gamma.a),
                      new_poly, packet.phase - 0.5 * t * float(packet.xi @ packet.xi), packet.h)


def _blocks(gamma: ComplexSymMatrix, frame: VariationalFrame):
    a = 1j * gamma.a
    z = frame.dxx + frame.dxxi @ a
    w = frame.dxix + frame.dxixi @ a
    return z, w


def gamma_transport(gamma, frame: VariationalFrame) -> ComplexSymMatrix:
    """Gamma_t = -i (Dxixi iGamma + Dxix)(Dxx + Dxxi iGamma)^{-1}.

    This is the linear-fractional action of the flow Jacobian on the
    Lagrangian plane of exp(i y.(i Gamma) y / 2); it reproduces the free
    evolution (Gamma^{-1} + i t)^{-1} and the Riccati equation
    d/dt Gamma_t = i (Hess V(x_t) - Gamma_t^2).
    """
    g = as_matrix(gamma)
    z, w = _blocks(g, frame)
    if abs(np.linalg.det(z)) < 1e-12:
        raise CausticError("Dxx + i Dxxi Gamma is singular")
    out = -1j * w @ np.linalg.inv(z)
    # the asymmetry mirrors the frame's symplectic defect (dense output is ~1e-9)
    scale = max(1.0, float(np.max(np.abs(out))))
    if np.max(np.abs(out - out.T)) > 1e-8 * scale:
        raise CausticError("transported matrix lost symmetry; frame is not symplectic")
    return ComplexSymMatrix(0.5 * (out + out.T))


def amplitude_matrix(gamma, frame: VariationalFrame) -> np.ndarray:
    """Z = Dxx + i Dxxi Gamma, whose det^{-1/2} is the packet amplitude."""
    return _blocks(as_matrix(gamma), frame)[0]


def leading_poly_transport(poly: MultiPoly, gamma, frame: VariationalFrame,
                           sqrt_det: Optional[complex] = None) -> MultiPoly:
    """Leading-order polynomial pi_0 carried along by the linearized flow.

    In rescaled coordinates the linearized flow acts by a metaplectic
    operator R with R y R^* = Dxixi^T y - Dxxi^T eta.  Acting on
    q(y) exp(i y.A_t y / 2), A_t = i Gamma_t, the operator eta = -i grad
    becomes A_t y + (-i grad on q), so each y'_j acts on polynomials as

        q -> ((Dxixi^T - Dxxi^T A_t) y)_j q + i (Dxxi^T grad q)_j

    and pi_0 = det(Z)^{-1/2} P(y') 1.  The square root must be continued
    along the trajectory; pass it as ``sqrt_det`` (the principal branch is
    used otherwise, which is only right for short times).
    """
    g = as_matrix(gamma)
    d = poly.dim
    z, _ = _blocks(g, frame)
    if abs(np.linalg.det(z)) < 1e-12:
        raise CausticError("Dxx + i Dxxi Gamma is singular")
    gt = gamma_transport(g, frame)
    lin = frame.dxixi.T - frame.dxxi.T @ (1j * gt.a)
    b_t = frame.dxxi.T
    if sqrt_det is None:
        sqrt_det = complex(np.sqrt(np.linalg.det(z)))

    def raise_op(q: MultiPoly, j: int) -> MultiPoly:
        out = MultiPoly.zero(d)
        for k in range(d):
            if lin[j, k] != 0:
                out = out + q.mul_var(k) * lin[j, k]
            if b_t[j, k] != 0:
                out = out + q.derivative(k) * (1j * b_t[j, k])
        return out

    images = {(0,) * d: MultiPoly.constant(d, 1.0)}

    def image(alpha):
        if alpha not in images:
            j = next(k for k in range(d) if alpha[k] > 0)
            lower = list(alpha)
            lower[j] -= 1
            images[alpha] = raise_op(image(tuple(lower)), j)
        return images[alpha]

    out = MultiPoly.zero(d)
    for alpha, c in sorted(poly.items()):
        out = out + image(alpha) * c
    return out * (1.0 / sqrt_det)


@dataclass(frozen=True)
class Propagation:
    """Leading-order propagated packet plus the classical data behind it."""

    packet: WavePacket
    frame: VariationalFrame
    sqrt_det: complex
    lagrangian: float
    t: float


def propagate_full(packet: WavePacket, t: float, potential: Potential,
                   tol: float = DEFAULT_TOL, order: int = 0) -> Propagation:
    if order != 0:
        raise UnsupportedOrder("only the leading order (N = 0) is implemented")
    rho = PhasePoint(packet.x, packet.xi)
    traj = integrate(potential, rho, t, tol, frame=True, dense=True)
    frame = traj.frame
    g = packet.gamma
    if t == 0:
        root = 1.0 + 0j
    else:
        root = sqrt_det_analytic(lambda s: amplitude_matrix(g, traj.state_at(s)[2]),
                                 endpoint=t, start=1.0)
    new_gamma = gamma_transport(g, frame)
    new_poly = leading_poly_transport(packet.poly, g, frame, sqrt_det=root)
    # packet phase convention: exp(i x.xi/h), so the increment is the
    # Lagrangian action minus x_t.xi_t - x_0.xi_0
    dphase = traj.lagrangian - float(traj.x @ traj.xi) + float(packet.x @ packet.xi)
    out = WavePacket(traj.x, traj.xi, new_gamma, new_poly, packet.phase + dphase, packet.h)
    return Propagation(out, frame, root, traj.lagrangian, t)


def propagate(packet: WavePacket, t: float, potential: Potential,
              tol: float = DEFAULT_TOL, order: int = 0) -> WavePacket:
    """Leading-order (N = 0) semiclassical evolution exp(-i t P_h / h) of a packet.

    The L^2 error against the exact evolution is O(h^{1/2}) for fixed t.
    """
    return propagate_full(packet, t, potential, tol, order).packet


@dataclass(frozen=True)
class SphereProfile:
    """x -> prefactor P((x - peak)/sqrt h) exp(-i shift.(x - peak)/h) exp(-(x - peak).M(x - peak)/2h)."""

    peak: np.ndarray
    poly: MultiPoly
    shift: np.ndarray
    matrix: ComplexSymMatrix
    prefactor: complex
    h: float

    def __call__(self, xhat):
        xhat = np.asarray(xhat, dtype=float)
        v = xhat - self.peak
        quad = np.einsum("...i,ij,...j->...", v, self.matrix.a, v)
        return (self.prefactor * self.poly(v / np.sqrt(self.h))
                * np.exp(-1j * (v @ self.shift) / self.h - quad / (2 * self.h)))


def _radiation_constant(d: int, h: float) -> float:
    # stationary phase in t with phase |x| phi(tau) / 2h, phi''(1) = 2, gives (2 pi h / |x|)^{1/2}
    return np.sqrt(2 * np.pi * h) / (2 * np.pi) ** (d / 2)


def _require_shell(packet: WavePacket):
    if not packet.on_shell():
        raise OffShell(f"|xi| = {np.linalg.norm(packet.xi)!r}, expected 1")


def farfield_future(packet: WavePacket, T: float = 0.0) -> SphereProfile:
    """lim |x|^{(d-1)/2} e^{-i|x|/h} (int_T^inf U_0(t) u e^{it/2h} dt)(|x| xhat).

    The limit does not depend on T.
    """
    _require_shell(packet)
    d = packet.dim
    g = packet.gamma
    pref = (np.exp(1j * (1 - d) * np.pi / 4) * _radiation_constant(d, packet.h)
            * np.exp(1j * packet.phase / packet.h))
    return SphereProfile(packet.xi.copy(), fourier_gaussian_poly(packet.poly, g),
                         packet.x.copy(), g.inv(), complex(pref), packet.h)


def farfield_past(packet: WavePacket, T: float = 0.0) -> SphereProfile:
    """lim |x|^{(d-1)/2} e^{+i|x|/h} (int_{-inf}^T U_0(t) u e^{it/2h} dt)(|x| xhat).

    Peaked at xhat = -xi.  Obtained from :func:`farfield_future` through
    U_0(-t) f = conj(U_0(t) conj f); the Gaussian matrix comes out as
    Gamma^{-1} (conjugating twice restores it).
    """
    _require_shell(packet)
    d = packet.dim
    g = packet.gamma
    pref = (np.exp(1j * (d - 1) * np.pi / 4) * _radiation_constant(d, packet.h)
            * np.exp(1j * packet.phase / packet.h))
    return SphereProfile(-packet.xi, fourier_gaussian_poly(packet.poly, g).reflect(),
                         -packet.x, g.inv(), complex(pref), packet.h)
