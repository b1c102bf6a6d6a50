"""Brute-force time quadrature of free radiation integrals.

Evaluates

    v(X) = int_T^inf (U_0(t) u)(X) e^{it/2h} dt      (future)
    v(X) = int_-inf^T (U_0(t) u)(X) e^{it/2h} dt     (past)

at a single far point X for a pure Gaussian packet u (constant polynomial),
using the textbook free-Gaussian closed form only, so it shares no code with
the P_Gamma calculus.  The integrand decays like |t|^{-d/2} while
oscillating, so the tail |t| > 2|X| is taken along a vertical line in the
complex t plane, where it decays exponentially.  The rest is covered by
Gauss-Legendre panels sized to the local oscillation frequency.
"""
from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .wavepacket import WavePacket

GL_NODES = 24


class _FreeGaussian:
    """(U_0(t) u)(X) for u = c exp(i x.xi/h) exp(-(x - x0).G(x - x0)/2h), complex t allowed."""

    def __init__(self, packet: WavePacket):
        if packet.poly.degree() > 0:
            raise ValidationError("the quadrature oracle handles constant polynomials only")
        self.c = packet.poly.coeff((0,) * packet.dim) * np.exp(1j * packet.phase / packet.h)
        self.x0, self.xi, self.h = packet.x, packet.xi, packet.h
        lam, vecs = np.linalg.eig(packet.gamma.a)
        self.lam, self.vecs, self.vinv = lam, vecs, np.linalg.inv(vecs)

    def log_value(self, t, X, branch_path=None):
        """log of the integrand times e^{-it/2h}; t is a 1-d ordered array."""
        t = np.asarray(t, dtype=complex)
        fac = 1.0 + 1j * t[:, None] * self.lam[None, :]            # eigenvalues of I + itG
        log_fac = np.log(fac)
        if branch_path is not None:
            # continue each factor's argument along the ordered nodes
            ang = np.unwrap(np.angle(fac), axis=0)
            ang += branch_path[None, :] - ang[0][None, :]
            log_fac = np.log(np.abs(fac)) + 1j * ang
        y = X[None, :] - self.x0[None, :] - t[:, None] * self.xi[None, :]
        yv = y @ self.vinv.T                                       # coordinates in eigenbasis
        wv = y @ self.vecs                                         # y^T V
        quad = np.sum(wv * (self.lam / fac) * yv, axis=1)          # y.G(I + itG)^{-1} y
        xi2 = self.xi @ self.xi
        return (np.log(self.c) - 0.5 * np.sum(log_fac, axis=1)
                + 1j * (X @ self.xi) / self.h - 1j * t * xi2 / (2 * self.h)
                - quad / (2 * self.h))


def _gl_panels(edges):
    nodes, weights = np.polynomial.legendre.leggauss(GL_NODES)
    a, b = edges[:-1, None], edges[1:, None]
    t = 0.5 * (b - a) * nodes[None, :] + 0.5 * (a + b)
    w = 0.5 * (b - a) * weights[None, :]
    return t.ravel(), w.ravel()


def _real_segment(f_log, lo, hi, h, rel_floor=1e-18, n_coarse=200001):
    """Integrate exp(f_log(t) + i t/2h) over real [lo, hi] with frequency-adapted panels."""
    tc = np.linspace(lo, hi, n_coarse)
    ex = f_log(tc) + 1j * tc / (2 * h)
    amp = ex.real
    keep = amp > amp.max() + np.log(rel_floor)
    if not np.any(keep):
        return 0j
    i0 = max(int(np.argmax(keep)) - 1, 0)
    i1 = min(len(tc) - 1 - int(np.argmax(keep[::-1])) + 1, len(tc) - 1)
    tc, ex = tc[i0:i1 + 1], ex[i0:i1 + 1]
    freq = np.abs(np.gradient(ex, tc)) + 1e-12
    # panel edges: advance by ~2 radians of phase (or amplitude e-fold) per panel
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (freq[1:] + freq[:-1]) * np.diff(tc))])
    n_pan = max(int(np.ceil(cum[-1] / 2.0)), 8)
    edges = np.interp(np.linspace(0, cum[-1], n_pan + 1), cum, tc)
    t, w = _gl_panels(edges)
    return complex(np.sum(w * np.exp(f_log(t) + 1j * t / (2 * h))))


def radiation_integral(packet: WavePacket, X, T: float = 0.0, direction: str = "future") -> complex:
    """v(X) for the future (t >= T) or past (t <= T) half-line."""
    X = np.asarray(X, dtype=float)
    g = _FreeGaussian(packet)
    h = packet.h
    R = float(np.linalg.norm(X - packet.x))
    t1 = 2.0 * R + abs(T) + 10.0
    sign = 1.0 if direction == "future" else -1.0
    if direction not in ("future", "past"):
        raise ValidationError("direction must be 'future' or 'past'")

    def f_real(t):
        return g.log_value(np.asarray(t, dtype=float), X)

    lo, hi = (T, t1) if sign > 0 else (-t1, T)
    total = _real_segment(f_real, lo, hi, h)

    # vertical tail at t = sign*t1 + i s, s >= 0; e^{it/2h} decays there
    s_max = 200.0 * h
    edges = np.linspace(0.0, s_max, int(np.ceil(s_max / (0.25 * h))) + 1)
    s, w = _gl_panels(edges)
    s = np.concatenate([[0.0], s])
    tv = sign * t1 + 1j * s
    start_branch = np.angle(1.0 + 1j * sign * t1 * g.lam)
    lv = g.log_value(tv, X, branch_path=start_branch) + 1j * tv / (2 * h)
    tail = 1j * np.sum(w * np.exp(lv[1:]))
    # future: int_{t1}^{inf} = i int_0^inf f(t1 + is) ds;  past: int_{-inf}^{-t1} = -i int_0^inf f(-t1 + is) ds
    total += sign * tail
    return complex(total)


def radiation_limit_estimate(packet: WavePacket, xhat, radius: float, T: float = 0.0,
                             direction: str = "future") -> complex:
    """|x|^{(d-1)/2} e^{-+i|x|/h} v(|x| xhat) at finite |x| = radius."""
    xhat = np.asarray(xhat, dtype=float)
    d = packet.dim
    v = radiation_integral(packet, radius * xhat, T, direction)
    sgn = -1.0 if direction == "future" else 1.0
    return complex(radius ** ((d - 1) / 2) * np.exp(sgn * 1j * radius / packet.h) * v)
