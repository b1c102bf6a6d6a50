"""Hamiltonian flow of p(x, xi) = |xi|^2/2 + V(x) and the classical scattering map.

Everything is integrated as one ODE system: position, momentum, optionally the
2d x 2d Jacobian of the flow (the variational frame) and two scalar
quadratures used by the action integral.  The integrator is scipy's embedded
Runge-Kutta 8(5,3) with dense output.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NotOrthogonal, OffShell, StepFailure, TrappedTrajectory, ValidationError
from .potential import Potential

DEFAULT_TOL = 1e-10
TRAP_FACTOR = 1e3


@dataclass(frozen=True)
class PhasePoint:
    x: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).reshape(-1)
        xi = np.asarray(self.xi, dtype=float).reshape(-1)
        if x.shape != xi.shape:
            raise ValidationError("x and xi must have the same length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(xi))):
            raise ValidationError("phase point has non-finite entries")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xi", xi)

    @property
    def dim(self) -> int:
        return self.x.size

    def energy(self, potential: Potential) -> float:
        return 0.5 * float(self.xi @ self.xi) + float(potential.value(self.x))


@dataclass(frozen=True)
class VariationalFrame:
    """Jacobian blocks of the flow: (dx_t, dxi_t) = M (dx_0, dxi_0), M = [[dxx, dxxi], [dxix, dxixi]]."""

    dxx: np.ndarray
    dxxi: np.ndarray
    dxix: np.ndarray
    dxixi: np.ndarray

    @classmethod
    def identity(cls, d: int) -> "VariationalFrame":
        e, z = np.eye(d), np.zeros((d, d))
        return cls(e, z, z, e)

    @classmethod
    def from_matrix(cls, m) -> "VariationalFrame":
        m = np.asarray(m, dtype=float)
        d = m.shape[0] // 2
        return cls(m[:d, :d], m[:d, d:], m[d:, :d], m[d:, d:])

    @classmethod
    def free(cls, d: int, t: float) -> "VariationalFrame":
        e, z = np.eye(d), np.zeros((d, d))
        return cls(e, t * e, z, e)

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.dxx, self.dxxi], [self.dxix, self.dxixi]])

    @property
    def dim(self) -> int:
        return self.dxx.shape[0]

    def symplectic_defect(self) -> float:
        m = self.matrix
        d = self.dim
        j = np.block([[np.zeros((d, d)), np.eye(d)], [-np.eye(d), np.zeros((d, d))]])
        return float(np.max(np.abs(m.T @ j @ m - j)))

    def compose(self, first: "VariationalFrame") -> "VariationalFrame":
        """Frame of applying ``first`` then ``self``."""
        return VariationalFrame.from_matrix(self.matrix @ first.matrix)


@dataclass
class Trajectory:
    """Result of one integration; ``sol`` is the dense interpolant (or None)."""

    t: float
    x: np.ndarray
    xi: np.ndarray
    frame: Optional[VariationalFrame]
    lagrangian: float       # int_0^t (|xi|^2/2 - V) ds
    virial: float           # int_0^t x.grad V ds
    sol: object
    dim: int
    with_frame: bool
    terminated: bool = False

    @property
    def end(self) -> PhasePoint:
        return PhasePoint(self.x, self.xi)

    def state_at(self, s):
        """(x, xi, frame or None) at intermediate time s (dense output)."""
        y = self.sol(s)
        return _unpack(y, self.dim, self.with_frame)


def _unpack(y, d, with_frame):
    x, xi = y[:d], y[d:2 * d]
    frame = None
    if with_frame:
        m = y[2 * d:2 * d + 4 * d * d].reshape(2 * d, 2 * d)
        frame = VariationalFrame.from_matrix(m)
    return x, xi, frame


def _rhs_factory(potential: Potential, d: int, with_frame: bool):
    n_m = 4 * d * d if with_frame else 0

    def rhs(_t, y):
        x, xi = y[:d], y[d:2 * d]
        g = potential.grad(x)
        out = np.empty_like(y)
        out[:d] = xi
        out[d:2 * d] = -g
        if with_frame:
            m = y[2 * d:2 * d + n_m].reshape(2 * d, 2 * d)
            hess = potential.hessian(x)
            dm = np.empty_like(m)
            dm[:d] = m[d:]
            dm[d:] = -hess @ m[:d]
            out[2 * d:2 * d + n_m] = dm.ravel()
        out[-2] = 0.5 * (xi @ xi) - potential.value(x)
        out[-1] = x @ g
        return out

    return rhs


def _max_step(potential: Potential) -> float:
    # without a cap the controller can take one step across a faint bump: the
    # endpoint stays accurate but the dense output in between does not, and a
    # bump may be stepped over entirely
    radii = [b.radius for b in potential.bumps]
    return 0.25 * min(radii) if radii else np.inf


def integrate(potential: Potential, rho0: PhasePoint, t: float, tol: float = DEFAULT_TOL,
              frame: bool = False, dense: bool = False, events=None) -> Trajectory:
    """Integrate the flow (and optionally its linearization) from time 0 to t."""
    if not tol > 0:
        raise ValidationError("tol must be positive")
    d = rho0.dim
    if d != potential.dim:
        raise ValidationError("phase point and potential dimensions differ")
    parts = [rho0.x, rho0.xi]
    if frame:
        parts.append(np.eye(2 * d).ravel())
    parts.append(np.zeros(2))
    y0 = np.concatenate(parts)
    if t == 0 and events is None:
        x, xi, fr = _unpack(y0, d, frame)
        return Trajectory(0.0, x.copy(), xi.copy(), fr, 0.0, 0.0,
                          (lambda s, y0=y0: y0.copy()) if dense else None, d, frame)
    sol = solve_ivp(_rhs_factory(potential, d, frame), (0.0, t), y0, method="DOP853",
                    rtol=tol, atol=tol, dense_output=dense, events=events,
                    max_step=_max_step(potential))
    if sol.status == -1:
        raise StepFailure(sol.message)
    y = sol.y[:, -1]
    x, xi, fr = _unpack(y, d, frame)
    return Trajectory(float(sol.t[-1]), x, xi, fr, float(y[-2]), float(y[-1]),
                      sol.sol if dense else None, d, frame, sol.status == 1)


def flow(rho0: PhasePoint, t: float, potential: Potential, tol: float = DEFAULT_TOL) -> PhasePoint:
    """Phi^t(rho0)."""
    return integrate(potential, rho0, t, tol).end


def variational_frame(rho0: PhasePoint, t: float, potential: Potential,
                      tol: float = DEFAULT_TOL) -> VariationalFrame:
    return integrate(potential, rho0, t, tol, frame=True).frame


def _unit(v, name="direction"):
    v = np.asarray(v, dtype=float).reshape(-1)
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise OffShell(f"{name} must be a unit vector (|v| = {np.linalg.norm(v)!r})")
    return v


def incoming_point(omega, eta, t0: float) -> PhasePoint:
    """Representative of rho_{omega,eta}: (-(T0 + 1) omega + eta, omega)."""
    omega = _unit(omega, "omega")
    eta = np.asarray(eta, dtype=float).reshape(-1)
    if abs(omega @ eta) > 1e-10:
        raise NotOrthogonal(f"eta . omega = {omega @ eta:.3e}")
    return PhasePoint(-(t0 + 1.0) * omega + eta, omega.copy())


def _make_escape_event(radius: float, d: int):
    def event(_t, y):
        x, xi = y[:d], y[d:2 * d]
        return min(np.sqrt(x @ x) - radius, x @ xi)
    event.terminal = True
    event.direction = 1
    return event


def _check_support(potential: Potential) -> float:
    t0 = potential.support_radius
    if not np.isfinite(t0):
        raise ValidationError("scattering needs a compactly supported potential")
    return t0


def run_to_escape(potential: Potential, rho0: PhasePoint, tol: float = DEFAULT_TOL,
                  radius: float | None = None, t_max: float | None = None,
                  frame: bool = False, dense: bool = False) -> Trajectory:
    """Integrate forward until |x| > radius with x.xi > 0 (default radius T0 + 1)."""
    t0 = _check_support(potential)
    radius = t0 + 1.0 if radius is None else radius
    t_max = TRAP_FACTOR * (t0 + 1.0) if t_max is None else t_max
    ev = _make_escape_event(radius, rho0.dim)
    if ev(0.0, np.concatenate([rho0.x, rho0.xi])) > 0:
        return integrate(potential, rho0, 0.0, tol, frame=frame, dense=dense)
    traj = integrate(potential, rho0, t_max, tol, frame=frame, dense=dense, events=[ev])
    if not traj.terminated:
        raise TrappedTrajectory(f"no escape from radius {radius} within T_max = {t_max}")
    return traj


@dataclass(frozen=True)
class ScatteringImage:
    omega: np.ndarray
    eta: np.ndarray
    time_delay: float


def scattering_map(omega, eta, potential: Potential, tol: float = DEFAULT_TOL,
                   escape_radius: float | None = None, t_max: float | None = None) -> ScatteringImage:
    """kappa(omega, eta) = (omega', eta') together with the delay t'.

    The outgoing asymptote is x = omega' (t - t') + eta', with t measured so
    that the incoming asymptote reads x = t omega + eta.
    """
    t0 = _check_support(potential)
    rho = incoming_point(omega, eta, t0)
    traj = run_to_escape(potential, rho, tol, radius=escape_radius, t_max=t_max)
    w = traj.xi / np.linalg.norm(traj.xi)
    e = traj.x - (traj.x @ w) * w
    paper_time = traj.t - (t0 + 1.0)
    return ScatteringImage(w, e, float(paper_time - traj.x @ w))


@dataclass(frozen=True)
class ActionResult:
    delta: float        # action phase, Lagrangian form
    delta_virial: float  # same quantity from int x.grad V (valid on the energy shell 1/2)
    lagrangian: float
    end: PhasePoint


def action_integral(rho_minus: PhasePoint, t: float, potential: Potential,
                    tol: float = DEFAULT_TOL) -> ActionResult:
    """delta_t = int_0^t (|xi_s|^2/2 - V(x_s)) ds - (x_t.xi_t + x_-.xi_-)/2.

    The second form uses d/ds (x.xi) = |xi|^2 - x.grad V and |xi|^2/2 = 1/2 - V:
    delta_t = int_0^t x.grad V ds + x_t.xi_t/2 - 3 x_-.xi_-/2 - t/2.
    """
    traj = integrate(potential, rho_minus, t, tol)
    a0 = float(rho_minus.x @ rho_minus.xi)
    a1 = float(traj.x @ traj.xi)
    delta = traj.lagrangian - 0.5 * (a1 + a0)
    delta_v = traj.virial + 0.5 * a1 - 1.5 * a0 - 0.5 * t
    return ActionResult(delta, delta_v, traj.lagrangian, traj.end)


@dataclass(frozen=True)
class EscapeTimes:
    t_minus: float
    t_plus: float
    minus: PhasePoint
    plus: PhasePoint


def escape_times(x0, xi0, potential: Potential, tol: float = DEFAULT_TOL,
                 t_max: float | None = None) -> EscapeTimes:
    """Times t_- and t_+ of the Gaussian-state construction.

    t_- moves the free backward ray x0 - t xi0 out to x.xi = -(T0 + 2), i.e. one
    unit of margin beyond the ball of radius T0 + 1; from there the forward
    flow is run until it leaves that ball outwards, and t_+ adds one more unit.
    t_- may be negative when x0 already lies further back on its ray.
    """
    t0 = _check_support(potential)
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    xi0 = _unit(xi0, "xi0")
    t_minus = float(x0 @ xi0 + t0 + 2.0)
    minus = PhasePoint(x0 - t_minus * xi0, xi0)
    traj = run_to_escape(potential, minus, tol, t_max=t_max)
    t_plus = traj.t + 1.0
    plus = PhasePoint(traj.x + traj.xi, traj.xi)  # outside the support the flow is free
    return EscapeTimes(t_minus, t_plus, minus, plus)
