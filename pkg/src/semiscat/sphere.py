"""Functions on the unit circle: cut-off Gaussian states, the coherent-state
resolution of identity and the associated trace formula.

Only d = 2 is handled by the quadratures; state evaluation works in any
dimension.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import OffShell, ValidationError

PLATEAU, SUPPORT = 0.5, 0.75


class TruncationTooSmall(UserWarning):
    """The x-truncation is too short for the inner integral to approach its limit."""


def _g(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def smooth_step(u):
    """0 for u <= 0, 1 for u >= 1, C^infinity in between."""
    a, b = _g(u), _g(1.0 - np.asarray(u, dtype=float))
    return a / (a + b)


def chi(r):
    """Cutoff: 1 on [0, 1/2], 0 on [3/4, inf)."""
    r = np.asarray(r, dtype=float)
    out = 1.0 - smooth_step((r - PLATEAU) / (SUPPORT - PLATEAU))
    return float(out) if out.ndim == 0 else out


def chi_tilde(t, h):
    """e^{-t^2/2h} chi(t / h^{1/3})."""
    t = np.asarray(t, dtype=float)
    return np.exp(-t * t / (2 * h)) * chi(np.abs(t) / h ** (1.0 / 3.0))


def eval_state(state, xhat, cutoff: bool = True):
    """Value of a sphere Gaussian state at unit vectors ``xhat`` (shape (..., d)).

    ``cutoff=False`` gives the tilde variant, i.e. the same expression without
    the chi(|xhat - xi0| / h^{1/3}) factor.
    """
    xhat = np.asarray(xhat, dtype=float)
    if np.any(np.abs(np.linalg.norm(xhat, axis=-1) - 1.0) > 1e-10):
        raise OffShell("evaluation points must lie on the unit sphere")
    h = state.h
    v = xhat - state.xi0
    quad = np.einsum("...i,ij,...j->...", v, state.gamma0.a, v)
    val = (state.q0(v / np.sqrt(h)) * np.exp(-1j * (xhat @ state.x0) / h)
           * np.exp(-quad / (2 * h)))
    if cutoff:
        val = val * chi(np.linalg.norm(v, axis=-1) / h ** (1.0 / 3.0))
    return val


def circle(theta):
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


@dataclass(frozen=True)
class SphereFunction:
    """Samples of a function on S^1 at the uniform angles 2 pi k / n."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).reshape(-1)
        if v.size < 16:
            raise ValidationError("sphere grids need at least 16 points")
        if not np.all(np.isfinite(v)):
            raise ValidationError("sphere function has non-finite values")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, f, n: int) -> "SphereFunction":
        return cls(f(cls.grid(n)))

    @staticmethod
    def grid(n: int) -> np.ndarray:
        return 2 * np.pi * np.arange(n) / n

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def theta(self) -> np.ndarray:
        return self.grid(self.n)

    def l2(self) -> float:
        return float(np.sqrt(2 * np.pi / self.n * np.sum(np.abs(self.values) ** 2)))

    def __mul__(self, c):
        return SphereFunction(self.values * c)

    __rmul__ = __mul__

    def __sub__(self, other):
        return SphereFunction(self.values - other.values)


def resolution_constant(h: float, d: int = 2, omega_angle: float = 0.0) -> float:
    """c_h with c_h^{-1} = (2 pi h)^{d-1} int dxi |cos(omega, xi)|^{-(d-1)} chi~^2(|omega - xi|).

    For d = 2 the xi-integral runs over the circle.  The Jacobian of the
    chart (x, xi) -> (omega, eta) is |cos|^{-1}, which makes c_h ~
    2^{1/2} (2 pi h)^{-3/2}.  The integrand only depends on the angle between
    omega and xi, so ``omega_angle`` is irrelevant except as a check.
    """
    if d != 2:
        raise ValidationError("the resolution-of-identity quadrature is implemented for d = 2")
    if not 0 < h <= 0.5:
        raise ValidationError("h must lie in (0, 1/2]")
    omega = circle(omega_angle)
    # |omega - xi| = 2 sin(|a|/2) reaches the support edge at a_max
    r_max = SUPPORT * h ** (1.0 / 3.0)
    a_max = 2 * np.arcsin(min(r_max / 2, 1.0))

    def f(a):
        xi = circle(omega_angle + a)
        dist = np.linalg.norm(omega - xi)
        return chi_tilde(dist, h) ** 2 / abs(np.cos(a))

    # the Gaussian lives on the scale sqrt(h); split there for the adaptive rule
    pts = sorted({min(k * np.sqrt(h), a_max) for k in (0.5, 1, 2, 4, 8)})
    val, err = integrate.quad(f, -a_max, a_max, points=[-p for p in pts] + pts,
                              epsabs=0.0, epsrel=1e-12, limit=400)
    return 1.0 / ((2 * np.pi * h) * val)


def resolution_asymptotic(h: float, d: int = 2) -> float:
    return 2 ** ((d - 1) / 2) * (2 * np.pi * h) ** (-3 * (d - 1) / 2)


def _window(h):
    return SUPPORT * h ** (1.0 / 3.0)


def _dirichlet(delta, X, h):
    """int_{-X}^{X} e^{i x delta / h} dx."""
    delta = np.asarray(delta, dtype=float)
    small = np.abs(delta) < 1e-14
    safe = np.where(small, 1.0, delta)
    return np.where(small, 2 * X, 2 * h * np.sin(X * safe / h) / safe)


def _state_factor(theta_pts, xi_angle, h):
    """chi~(|omega - xi|) at the angles theta (the x-independent part of the state)."""
    a = np.angle(np.exp(1j * (theta_pts - xi_angle)))
    dist = 2 * np.abs(np.sin(a / 2))
    return chi_tilde(dist, h)


def reconstruct(f: SphereFunction, h: float, X: float = 20.0, n_xi: int | None = None) -> SphereFunction:
    """c_h int dxi int_{|x| <= X, x perp xi} phi_{x,xi}(omega) <phi_{x,xi}, f> on the grid of f.

    The states are the cut-off ones with Q0 = 1, Gamma0 = 1; x is the signed
    coordinate on the line xi^perp.  With x = s xi^perp, the x-integral of
    e^{-i s (xi^perp.(omega - omega'))/h} over [-X, X] is a Dirichlet kernel,
    so only a double sum over (xi, omega') remains.  The omega'-sum uses the
    grid of f.
    """
    if X <= 0:
        raise ValidationError("truncation X must be positive")
    if X < 50 * h:
        warnings.warn(f"X = {X} < 50 h; the inner integral is far from its limit",
                      TruncationTooSmall, stacklevel=2)
    n = f.n
    th = f.theta
    n_xi = n if n_xi is None else n_xi
    xis = SphereFunction.grid(n_xi)
    dth, dxi = 2 * np.pi / n, 2 * np.pi / n_xi
    win = _window(h)
    half = int(np.ceil(2 * np.arcsin(min(win / 2, 1.0)) / dth)) + 1
    c_h = resolution_constant(h)
    out = np.zeros(n, dtype=complex)
    for b in xis:
        # omega-window around xi on the grid
        k0 = int(np.round(b / dth))
        idx = (k0 + np.arange(-half, half + 1)) % n
        idx = np.unique(idx)
        w = _state_factor(th[idx], b, h)
        keep = w > 0
        idx, w = idx[keep], w[keep]
        if idx.size == 0:
            continue
        perp = np.array([-np.sin(b), np.cos(b)])
        proj = circle(th[idx]) @ perp
        kern = _dirichlet(proj[:, None] - proj[None, :], X, h)
        inner = kern @ (w * f.values[idx]) * dth
        out[idx] += w * inner * dxi
    return SphereFunction(c_h * out)


def trace_estimate(kernel, h: float, X: float = 20.0, n_xi: int | None = None) -> complex:
    """c_h int dxi int_{|x| <= X} <phi_{x,xi}, A phi_{x,xi}> for A given by its kernel.

    ``kernel`` is the n x n matrix K[i, j] = A(omega_i, omega_j) on the uniform
    grid, acting as (A f)(omega_i) = sum_j K[i, j] f(omega_j) 2 pi / n.
    """
    k = np.asarray(kernel, dtype=complex)
    n = k.shape[0]
    if k.shape != (n, n) or n < 16:
        raise ValidationError("kernel must be a square matrix on a grid of at least 16 points")
    if X < 50 * h:
        warnings.warn(f"X = {X} < 50 h; the inner integral is far from its limit",
                      TruncationTooSmall, stacklevel=2)
    th = SphereFunction.grid(n)
    n_xi = n if n_xi is None else n_xi
    xis = SphereFunction.grid(n_xi)
    dth, dxi = 2 * np.pi / n, 2 * np.pi / n_xi
    win = _window(h)
    half = int(np.ceil(2 * np.arcsin(min(win / 2, 1.0)) / dth)) + 1
    total = 0j
    for b in xis:
        k0 = int(np.round(b / dth))
        idx = np.unique((k0 + np.arange(-half, half + 1)) % n)
        w = _state_factor(th[idx], b, h)
        keep = w > 0
        idx, w = idx[keep], w[keep]
        if idx.size == 0:
            continue
        perp = np.array([-np.sin(b), np.cos(b)])
        proj = circle(th[idx]) @ perp
        # <phi, A phi> = sum_{i,j} conj(phi_i) K_ij phi_j dth^2, x-integrated:
        # int dx e^{i x (p_i - p_j)/h} = Dirichlet(p_i - p_j)
        kern = _dirichlet(proj[:, None] - proj[None, :], X, h)
        sub = k[np.ix_(idx, idx)]
        total += np.sum(w[:, None] * w[None, :] * kern * sub) * dth ** 2 * dxi
    return complex(resolution_constant(h) * total)
