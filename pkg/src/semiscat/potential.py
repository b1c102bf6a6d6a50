"""Compactly supported smooth potentials built from radial bumps.

Each bump is A exp(1 - 1/(1 - r^2)) with r = |x - c| / radius, so it equals A
at its centre and vanishes with all derivatives for r >= 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NonPositiveRadius, ValidationError


@dataclass(frozen=True)
class Bump:
    center: tuple
    radius: float
    amplitude: float

    def __post_init__(self):
        if not self.radius > 0:
            raise NonPositiveRadius(f"bump radius must be positive, got {self.radius}")


def _bump_terms(b: Bump, x: np.ndarray):
    """Return (f, f', f'', dx, s) for s = |x - c|^2 / R^2, zero outside the bump."""
    dx = x - np.asarray(b.center, dtype=float)
    s = np.sum(dx * dx, axis=-1) / b.radius**2
    inside = s < 1.0
    one_minus = np.where(inside, 1.0 - s, 1.0)
    f = np.where(inside, b.amplitude * np.exp(1.0 - 1.0 / one_minus), 0.0)
    f1 = -f / one_minus**2
    f2 = f * (1.0 / one_minus**4 - 2.0 / one_minus**3)
    return f, f1, f2, dx, s


@dataclass(frozen=True)
class Potential:
    """Smooth potential with value, gradient and Hessian.

    Methods accept points of shape (..., d).  ``support_radius`` is the T0 of
    the scattering set-up: spt V lies in the closed ball of that radius.  For
    potentials given by arbitrary callables it is whatever the caller states
    (``inf`` when unknown), and the scattering routines refuse an infinite one.
    """

    dim: int
    bumps: tuple = ()
    support_radius: float = 0.0
    _value: Optional[Callable] = field(default=None, repr=False, compare=False)
    _grad: Optional[Callable] = field(default=None, repr=False, compare=False)
    _hess: Optional[Callable] = field(default=None, repr=False, compare=False)

    @classmethod
    def from_callables(cls, dim, value, grad, hess, support_radius=np.inf) -> "Potential":
        return cls(dim=dim, bumps=(), support_radius=float(support_radius),
                   _value=value, _grad=grad, _hess=hess)

    @property
    def is_zero(self) -> bool:
        return not self.bumps and self._value is None

    def __call__(self, x):
        return self.value(x)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self._value is not None:
            return self._value(x)
        out = np.zeros(x.shape[:-1])
        for b in self.bumps:
            out = out + _bump_terms(b, x)[0]
        return out

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        if self._grad is not None:
            return self._grad(x)
        out = np.zeros(x.shape)
        for b in self.bumps:
            _, f1, _, dx, _ = _bump_terms(b, x)
            out = out + (2.0 * f1 / b.radius**2)[..., None] * dx
        return out

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        if self._hess is not None:
            return self._hess(x)
        out = np.zeros(x.shape + (self.dim,))
        eye = np.eye(self.dim)
        for b in self.bumps:
            _, f1, f2, dx, _ = _bump_terms(b, x)
            r2 = b.radius**2
            out = out + (4.0 * f2 / r2**2)[..., None, None] * dx[..., :, None] * dx[..., None, :]
            out = out + (2.0 * f1 / r2)[..., None, None] * eye
        return out

    def to_spec(self) -> list:
        return [{"center": list(b.center), "radius": b.radius, "amplitude": b.amplitude}
                for b in self.bumps]


def make_potential(spec: Sequence, dim: int | None = None) -> Potential:
    """Build a bump potential from ``[{center, radius, amplitude}, ...]``.

    An empty list gives V = 0 (then ``dim`` is required).
    """
    bumps = []
    for item in spec:
        if isinstance(item, Bump):
            bumps.append(item)
            continue
        center = tuple(float(c) for c in item["center"])
        bumps.append(Bump(center, float(item["radius"]), float(item["amplitude"])))
    dims = {len(b.center) for b in bumps}
    if len(dims) > 1:
        raise ValidationError("bump centres have inconsistent dimensions")
    if dims:
        d = dims.pop()
        if dim is not None and dim != d:
            raise ValidationError(f"bumps are {d}-dimensional, expected {dim}")
    elif dim is None:
        raise ValidationError("dimension is required for an empty potential")
    else:
        d = dim
    t0 = max((float(np.linalg.norm(b.center)) + b.radius for b in bumps), default=0.0)
    return Potential(dim=d, bumps=tuple(bumps), support_radius=t0)


def free_potential(dim: int) -> Potential:
    return make_potential([], dim=dim)
