"""Sparse polynomials in d commuting variables with complex coefficients."""
from __future__ import annotations

import itertools
from numbers import Number
from typing import Dict, Iterable, Mapping, Tuple

import numpy as np

from .errors import DegreeCapExceeded, ValidationError

DEFAULT_DEGREE_CAP = 16

MultiIndex = Tuple[int, ...]


def multi_indices(dim: int, max_degree: int) -> list[MultiIndex]:
    """All multi-indices with |alpha| <= max_degree, graded then lexicographic."""
    out = []
    for n in range(max_degree + 1):
        for alpha in itertools.product(range(n + 1), repeat=dim):
            if sum(alpha) == n:
                out.append(tuple(alpha))
    return out


class MultiPoly:
    """Immutable polynomial stored as a map multi-index -> coefficient.

    Exact zeros are dropped so that equality of supports is meaningful; the
    zero polynomial has degree ``-inf``.
    """

    __slots__ = ("dim", "_c", "cap")

    def __init__(self, dim: int, coeffs: Mapping[MultiIndex, complex] | None = None,
                 cap: int = DEFAULT_DEGREE_CAP):
        if dim < 1:
            raise ValidationError("dimension must be >= 1")
        c: Dict[MultiIndex, complex] = {}
        for alpha, v in (coeffs or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != dim or min(alpha) < 0:
                raise ValidationError(f"bad multi-index {alpha} for dim {dim}")
            if sum(alpha) > cap:
                raise DegreeCapExceeded(f"degree {sum(alpha)} exceeds cap {cap}")
            v = complex(v)
            if v != 0:
                c[alpha] = c.get(alpha, 0) + v
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "_c", {k: v for k, v in c.items() if v != 0})
        object.__setattr__(self, "cap", cap)

    def __setattr__(self, name, value):
        raise AttributeError("MultiPoly is immutable")

    # construction helpers
    @classmethod
    def constant(cls, dim: int, value: complex = 1.0) -> "MultiPoly":
        return cls(dim, {(0,) * dim: value})

    @classmethod
    def variable(cls, dim: int, j: int) -> "MultiPoly":
        alpha = [0] * dim
        alpha[j] = 1
        return cls(dim, {tuple(alpha): 1.0})

    @classmethod
    def zero(cls, dim: int) -> "MultiPoly":
        return cls(dim, {})

    @classmethod
    def random(cls, dim: int, degree: int, rng: np.random.Generator) -> "MultiPoly":
        """Dense random polynomial of exactly the given degree."""
        coeffs = {a: complex(*rng.normal(size=2)) for a in multi_indices(dim, degree)}
        return cls(dim, coeffs)

    @property
    def coeffs(self) -> Dict[MultiIndex, complex]:
        return dict(self._c)

    def items(self) -> Iterable[tuple[MultiIndex, complex]]:
        return self._c.items()

    def coeff(self, alpha: MultiIndex) -> complex:
        return self._c.get(tuple(alpha), 0j)

    def degree(self) -> float:
        if not self._c:
            return float("-inf")
        return max(sum(a) for a in self._c)

    def is_zero(self) -> bool:
        return not self._c

    # arithmetic
    def _check(self, other: "MultiPoly"):
        if other.dim != self.dim:
            raise ValidationError("dimension mismatch")

    def __add__(self, other):
        if isinstance(other, Number):
            other = MultiPoly.constant(self.dim, other)
        self._check(other)
        c = dict(self._c)
        for a, v in other._c.items():
            c[a] = c.get(a, 0) + v
        return MultiPoly(self.dim, c, self.cap)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.dim, {a: -v for a, v in self._c.items()}, self.cap)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return MultiPoly(self.dim, {a: v * other for a, v in self._c.items()}, self.cap)
        self._check(other)
        c: Dict[MultiIndex, complex] = {}
        for a, u in self._c.items():
            for b, v in other._c.items():
                k = tuple(x + y for x, y in zip(a, b))
                c[k] = c.get(k, 0) + u * v
        return MultiPoly(self.dim, c, self.cap)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __eq__(self, other):
        return isinstance(other, MultiPoly) and self.dim == other.dim and self._c == other._c

    def __hash__(self):
        return hash((self.dim, frozenset(self._c.items())))

    def __repr__(self):
        terms = ", ".join(f"{a}: {v:.6g}" for a, v in sorted(self._c.items()))
        return f"MultiPoly(dim={self.dim}, {{{terms}}})"

    # calculus
    def derivative(self, j: int) -> "MultiPoly":
        c = {}
        for a, v in self._c.items():
            if a[j] > 0:
                b = list(a)
                b[j] -= 1
                c[tuple(b)] = v * a[j]
        return MultiPoly(self.dim, c, self.cap)

    def mul_var(self, j: int) -> "MultiPoly":
        c = {}
        for a, v in self._c.items():
            b = list(a)
            b[j] += 1
            c[tuple(b)] = v
        return MultiPoly(self.dim, c, self.cap)

    def reflect(self) -> "MultiPoly":
        """Return y -> P(-y)."""
        return MultiPoly(self.dim, {a: v * (-1) ** sum(a) for a, v in self._c.items()}, self.cap)

    def conj(self) -> "MultiPoly":
        """Polynomial with conjugated coefficients."""
        return MultiPoly(self.dim, {a: v.conjugate() for a, v in self._c.items()}, self.cap)

    def compose_linear(self, lin) -> "MultiPoly":
        """Return y -> P(L y) for a (possibly complex) d x d matrix L."""
        lin = np.atleast_2d(np.asarray(lin, dtype=complex))
        rows = [MultiPoly(self.dim, {tuple(int(i == k) for i in range(self.dim)): lin[j, k]
                                      for k in range(self.dim)}, self.cap)
                for j in range(self.dim)]
        out = MultiPoly.zero(self.dim)
        for a, v in self._c.items():
            term = MultiPoly.constant(self.dim, v)
            for j, p in enumerate(a):
                for _ in range(p):
                    term = term * rows[j]
            out = out + term
        return out

    def __call__(self, y):
        """Evaluate at points of shape (..., d); a length-d vector gives a scalar."""
        y = np.asarray(y, dtype=complex)
        if y.shape[-1] != self.dim:
            raise ValidationError(f"points must have trailing dimension {self.dim}")
        out = np.zeros(y.shape[:-1], dtype=complex)
        for a, v in self._c.items():
            term = np.full(y.shape[:-1], v, dtype=complex)
            for j, p in enumerate(a):
                if p:
                    term = term * y[..., j] ** p
            out = out + term
        return out if out.ndim else complex(out)

    def max_coeff_diff(self, other: "MultiPoly") -> float:
        keys = set(self._c) | set(other._c)
        if not keys:
            return 0.0
        return max(abs(self.coeff(k) - other.coeff(k)) for k in keys)

    def to_list(self) -> list:
        """Serializable form: [[alpha...], re, im] rows sorted by index."""
        return [[list(a), v.real, v.imag] for a, v in sorted(self._c.items())]

    @classmethod
    def from_list(cls, dim: int, rows) -> "MultiPoly":
        return cls(dim, {tuple(r[0]): complex(r[1], r[2] if len(r) > 2 else 0.0) for r in rows})
