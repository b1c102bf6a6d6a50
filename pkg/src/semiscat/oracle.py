"""Split-step Fourier solver for i h u_t = (-h^2 Laplacian/2 + V) u on a periodic box.

Used as an independent check of the semiclassical constructions: direct
propagation of packets, moments of the solution, and the numerical assembly
of the approximate generalized eigenfunction E^0 with its residual.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy import ndimage

from .dynamics import DEFAULT_TOL, PhasePoint, run_to_escape
from .errors import BoxTooSmall, Multimodal, OffShell, ValidationError
from .potential import Potential
from .sphere import smooth_step
from .wavepacket import WavePacket, free_evolve, propagate

RING_FRACTION = 0.05
RING_TOL = 1e-8
MAGIC = b"GSWF"


@dataclass(frozen=True)
class GridWavefunction:
    """Samples on the periodic grid x_k = -L + 2 L k / n in each axis."""

    values: np.ndarray
    L: float
    h: float
    t: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim not in (1, 2):
            raise ValidationError("only d = 1 and d = 2 grids are supported")
        n = v.shape[0]
        if any(s != n for s in v.shape):
            raise ValidationError("grids must have the same size in every axis")
        if n < 256 or n & (n - 1):
            raise ValidationError("points per axis must be a power of two, at least 256")
        if not (self.L > 0 and self.h > 0):
            raise ValidationError("L and h must be positive")
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def dx(self) -> float:
        return 2 * self.L / self.n

    @property
    def axis(self) -> np.ndarray:
        return grid_axis(self.L, self.n)

    def points(self) -> np.ndarray:
        return grid_points(self.L, self.n, self.dim)

    def with_values(self, values, t: Optional[float] = None) -> "GridWavefunction":
        return GridWavefunction(values, self.L, self.h, self.t if t is None else t)

    def inner(self, other: "GridWavefunction") -> complex:
        return complex(np.vdot(self.values, other.values) * self.dx ** self.dim)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.dx ** self.dim))

    @classmethod
    def from_packet(cls, packet: WavePacket, L: float, n: int) -> "GridWavefunction":
        return cls(packet(grid_points(L, n, packet.dim)), L, packet.h)


def grid_axis(L: float, n: int) -> np.ndarray:
    return -L + 2 * L * np.arange(n) / n


def grid_points(L: float, n: int, d: int) -> np.ndarray:
    ax = grid_axis(L, n)
    if d == 1:
        return ax[:, None]
    xx, yy = np.meshgrid(ax, ax, indexing="ij")
    return np.stack([xx, yy], axis=-1)


def _k2(L: float, n: int, d: int) -> np.ndarray:
    k = 2 * np.pi * np.fft.fftfreq(n, d=2 * L / n)
    if d == 1:
        return k * k
    kx, ky = np.meshgrid(k, k, indexing="ij")
    return kx * kx + ky * ky


def _ring_mask(L: float, n: int, d: int) -> np.ndarray:
    pts = grid_points(L, n, d)
    return np.max(np.abs(pts), axis=-1) > L * (1 - RING_FRACTION)


def ring_mass(u: GridWavefunction) -> float:
    """Fraction of the mass in the outer boundary ring of the box."""
    p = np.abs(u.values) ** 2
    total = p.sum()
    return float(p[_ring_mask(u.L, u.n, u.dim)].sum() / total) if total > 0 else 0.0


def apply_hamiltonian(u: GridWavefunction, potential: Optional[Potential]) -> np.ndarray:
    """(-h^2 Laplacian / 2 + V) u with the spectral Laplacian."""
    k2 = _k2(u.L, u.n, u.dim)
    out = np.fft.ifftn(0.5 * u.h ** 2 * k2 * np.fft.fftn(u.values))
    if potential is not None and not potential.is_zero:
        out = out + potential.value(u.points()) * u.values
    return out


def energy(u: GridWavefunction, potential: Optional[Potential]) -> float:
    return float(np.real(np.vdot(u.values, apply_hamiltonian(u, potential))) * u.dx ** u.dim)


def _split_steps(u0: GridWavefunction, potential: Optional[Potential], T: float, dt: float,
                 stride: Optional[int]):
    if not dt > 0:
        raise ValidationError("dt must be positive")
    steps = max(int(np.ceil(abs(T) / dt - 1e-9)), 1) if T != 0 else 0
    tau = T / steps if steps else 0.0
    h = u0.h
    kin = np.exp(-1j * tau * h * _k2(u0.L, u0.n, u0.dim) / 2)
    if potential is not None and not potential.is_zero:
        half = np.exp(-1j * 0.5 * tau * potential.value(u0.points()) / h)
    else:
        half = None
    ring = _ring_mask(u0.L, u0.n, u0.dim)
    psi = u0.values.copy()
    total = float(np.sum(np.abs(psi) ** 2))
    out = []

    def audit(p, t):
        m = float(np.sum(np.abs(p[ring]) ** 2)) / total
        if m > RING_TOL:
            raise BoxTooSmall(f"boundary-ring mass {m:.2e} at t = {t:.4g}; enlarge L")

    audit(psi, u0.t)
    if stride:
        out.append(u0)
    for j in range(1, steps + 1):
        if half is not None:
            psi *= half
        psi = np.fft.ifftn(kin * np.fft.fftn(psi))
        if half is not None:
            psi *= half
        t = u0.t + j * tau
        audit(psi, t)
        if stride and j % stride == 0:
            out.append(u0.with_values(psi.copy(), t))
    return u0.with_values(psi, u0.t + T), out


def solve(u0: GridWavefunction, potential: Optional[Potential], T: float, dt: float) -> GridWavefunction:
    """Strang splitting: half potential step, exact kinetic step in Fourier space, half potential.

    The step is adjusted down so that T is an integer number of steps.
    Raises BoxTooSmall when the boundary ring ever carries more than 1e-8 of
    the mass.
    """
    return _split_steps(u0, potential, T, dt, None)[0]


def solve_snapshots(u0: GridWavefunction, potential: Optional[Potential], T: float, dt: float,
                    stride: int) -> List[GridWavefunction]:
    """Snapshots at t0 and every ``stride`` steps (the last one at T if stride divides the count)."""
    if stride < 1:
        raise ValidationError("stride must be at least 1")
    return _split_steps(u0, potential, T, dt, stride)[1]


def relative_l2_error(u: GridWavefunction, reference) -> float:
    ref = reference.values if isinstance(reference, GridWavefunction) else np.asarray(reference)
    return float(np.linalg.norm(u.values - ref) / np.linalg.norm(ref))


def propagation_error(packet: WavePacket, potential: Potential, t: float, L: float, n: int,
                      dt: float | None = None, tol: float = DEFAULT_TOL) -> float:
    """||U(t) u - propagate(u, t)|| / ||u|| with U(t) from the grid solver."""
    dt = packet.h / 20 if dt is None else dt
    u0 = GridWavefunction.from_packet(packet, L, n)
    exact = solve(u0, potential, t, dt)
    approx = propagate(packet, t, potential, tol=tol)
    ref = approx(grid_points(L, n, packet.dim))
    return float(np.linalg.norm(exact.values - ref) / np.linalg.norm(u0.values))


@dataclass(frozen=True)
class PacketMoments:
    center: np.ndarray
    momentum: np.ndarray
    cov: np.ndarray


def extract_packet_params(u: GridWavefunction) -> PacketMoments:
    """Position mean, momentum mean (h times the mean wavenumber) and position covariance."""
    p = np.abs(u.values) ** 2
    peak = p.max()
    if peak == 0:
        raise ValidationError("zero wavefunction")
    _, ncomp = ndimage.label(p > 0.1 * peak)
    if ncomp > 1:
        raise Multimodal(f"|u|^2 has {ncomp} separated regions above 10% of its maximum")
    pts = u.points().reshape(-1, u.dim)
    w = p.ravel() / p.sum()
    c = w @ pts
    y = pts - c
    cov = (y * w[:, None]).T @ y
    fk = np.abs(np.fft.fftn(u.values)) ** 2
    k = 2 * np.pi * np.fft.fftfreq(u.n, d=u.dx)
    if u.dim == 1:
        kk = k[:, None]
    else:
        kx, ky = np.meshgrid(k, k, indexing="ij")
        kk = np.stack([kx, ky], axis=-1).reshape(-1, 2)
    wk = fk.ravel() / fk.sum()
    return PacketMoments(c, u.h * (wk @ kk), cov)


def save_snapshot(path, u: GridWavefunction) -> None:
    header = json.dumps({"dims": list(u.values.shape), "L": u.L, "h": u.h, "t": u.t}).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(np.ascontiguousarray(u.values, dtype="<c16").tobytes())


def load_snapshot(path) -> GridWavefunction:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValidationError("not a wavefunction snapshot")
        (length,) = struct.unpack("<I", fh.read(4))
        head = json.loads(fh.read(length).decode())
        data = np.frombuffer(fh.read(), dtype="<c16")
    values = data.reshape(head["dims"]).astype(complex)
    return GridWavefunction(values, head["L"], head["h"], head["t"])


# -- generalized eigenfunction -------------------------------------------------

def _simpson_weights(m: int, step: float) -> np.ndarray:
    """Composite Simpson weights on m + 1 nodes (m even)."""
    w = np.ones(m + 1)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    return w * step / 3


def _even_nodes(length: float, max_step: float):
    m = max(int(np.ceil(length / max_step)), 2)
    m += m % 2
    return m, length / m


@dataclass(frozen=True)
class EigenfunctionResult:
    E: GridWavefunction
    residual: float              # ||(P_h - 1/2) E^0|| on the window
    normalized_residual: float   # residual / (h ||u^-||)
    t_plus: float
    t_back: float
    t_forward: float
    window: float

    def __iter__(self):
        yield self.E
        yield self.residual


def _free_tail_length(packet: WavePacket, window: float, L: float, n: int, sign: float,
                      rel: float = 1e-12) -> float:
    """Smallest whole T with |U_0(sign T) u| below threshold on the window.

    A freely spreading packet never leaves a fixed window completely: its
    width grows like its distance, leaving a relative floor
    exp(-xi.Re(Gamma^{-1}) xi / 2h).  The threshold is max(rel, 10 floor).
    """
    pts = grid_points(L, n, packet.dim)
    inside = np.max(np.abs(pts), axis=-1) <= window
    sub = pts[inside]
    scale = float(np.max(np.abs(packet(pts))))
    ginv = packet.gamma.inv().a.real
    floor = float(np.exp(-(packet.xi @ ginv @ packet.xi) / (2 * packet.h)))
    thresh = max(rel, 10 * floor) * scale
    T = 1.0
    while T < 1e4:
        if np.max(np.abs(free_evolve(packet, sign * T)(sub))) < thresh:
            return T
        T += 1.0
    raise BoxTooSmall("free tail does not leave the observation window")


def _taper(t, T):
    """1 on [0, T], smooth decay to 0 on [T, 2T]."""
    return 1.0 - smooth_step((np.asarray(t, dtype=float) - T) / T)


def _window_cutoff(pts, window, ramp):
    r = np.max(np.abs(pts), axis=-1)
    return 1.0 - smooth_step((r - window) / ramp)


def assemble_generalized_eigenfunction(packet: WavePacket, potential: Potential, L: float, n: int,
                                       window: float, quad_step: float | None = None,
                                       dt: float | None = None, margin: float = 2.0,
                                       tol: float = DEFAULT_TOL) -> EigenfunctionResult:
    """E^0 = int_{-inf}^0 U_0(t) u e^{it/2h} + int_0^{t_+} U(t) u e^{it/2h}
    + e^{i t_+/2h} int_0^{inf} U_0(t) u~ e^{it/2h}, u~ = propagate(u, t_+).

    ``packet`` is u^-, which must lie outside the support of V and be on the
    energy shell |xi| = 1.  t_+ is the time the trajectory needs to leave the
    ball of radius T0 + margin outwards.  The free pieces use the closed form;
    the middle piece uses solver snapshots; all three use composite Simpson
    in time with step <= quad_step (default h/10).  T_b and T_f are chosen so
    that the free integrands drop below 1e-12 on the window, or to ten times
    their Gaussian floor when that is larger.  A hard cut at T would leave the
    boundary term i h U_0(T) u in the residual, which is of the size of the
    floor; the free pieces are instead tapered smoothly to zero over [T, 2T].

    The residual (P_h - 1/2) E^0 is computed spectrally on chi_w E^0, where
    chi_w = 1 on the window and vanishes inside the box; it is measured only
    on the window, where chi_w = 1.  In the exact identity the residual is
    i h e^{it_+/2h}(U(t_+) u - u~) plus terms exponentially small in 1/h, so
    it is O(h^{3/2}) ||u||; ``normalized_residual`` divides by h ||u||.
    """
    if not packet.on_shell():
        raise OffShell("the packet must satisfy |xi| = 1")
    h, d = packet.h, packet.dim
    if d not in (1, 2):
        raise ValidationError("the eigenfunction assembly supports d = 1 and 2")
    quad_step = h / 10 if quad_step is None else quad_step
    dt = quad_step / 4 if dt is None else dt
    t0 = potential.support_radius
    if np.linalg.norm(packet.x) <= t0:
        raise ValidationError("the incoming packet must start outside the support of V")
    traj = run_to_escape(potential, PhasePoint(packet.x, packet.xi), tol, radius=t0 + margin)
    t_plus = traj.t
    u_plus = propagate(packet, t_plus, potential, tol=tol)
    pts = grid_points(L, n, d)
    ramp = 0.5 * (L - window)
    if ramp <= 0:
        raise BoxTooSmall("window must be smaller than the box")
    cut = _window_cutoff(pts, window, 0.8 * ramp)

    t_back = _free_tail_length(packet, window, L, n, -1.0)
    t_fwd = _free_tail_length(u_plus, window, L, n, +1.0)

    E = np.zeros(pts.shape[:-1], dtype=complex)
    # incoming free piece, t in [-2 T_b, 0], tapered on [-2 T_b, -T_b]
    m, step = _even_nodes(2 * t_back, quad_step)
    ts = np.linspace(-2 * t_back, 0.0, m + 1)
    for w, t in zip(_simpson_weights(m, step) * _taper(-ts, t_back), ts):
        if w:
            E += w * np.exp(1j * t / (2 * h)) * free_evolve(packet, t)(pts)
    # interacting piece from the solver, t in [0, t_+]
    m, step = _even_nodes(t_plus, quad_step)
    sub = max(int(np.ceil(step / dt)), 1)
    u0 = GridWavefunction.from_packet(packet, L, n)
    snaps = solve_snapshots(u0, potential, t_plus, step / sub, sub)
    if len(snaps) != m + 1:
        raise ValidationError("snapshot count does not match the quadrature nodes")
    for w, s in zip(_simpson_weights(m, step), snaps):
        E += w * np.exp(1j * s.t / (2 * h)) * s.values
    # outgoing free piece, t in [t_+, t_+ + 2 T_f], tapered on the second half
    m, step = _even_nodes(2 * t_fwd, quad_step)
    ts = np.linspace(0.0, 2 * t_fwd, m + 1)
    for w, t in zip(_simpson_weights(m, step) * _taper(ts, t_fwd), ts):
        if w:
            E += w * np.exp(1j * (t + t_plus) / (2 * h)) * free_evolve(u_plus, t)(pts)

    Eg = GridWavefunction(E, L, h)
    res = apply_hamiltonian(Eg.with_values(cut * E), potential) - 0.5 * cut * E
    inside = np.max(np.abs(pts), axis=-1) <= window
    dx = Eg.dx
    raw = float(np.sqrt(np.sum(np.abs(res[inside]) ** 2) * dx ** d))
    return EigenfunctionResult(Eg, raw, raw / (h * packet.norm()), float(t_plus),
                               float(t_back), float(t_fwd), float(window))
