"""Complex symmetric matrices and the analytic square root of det."""
from __future__ import annotations

from typing import Callable, Sequence, Union

import numpy as np

from .errors import AmbiguousBranch, DegenerateMatrix, SingularOnPath, ValidationError

SYM_TOL = 1e-10
INITIAL_PIECES = 16
SINGULAR_TOL = 1e-14


class ComplexSymMatrix:
    """A symmetric complex d x d matrix, usually with Re M positive definite.

    The stored array is exactly symmetric: input that is symmetric up to
    ``SYM_TOL`` (relative) is symmetrized, anything worse is rejected.
    """

    __slots__ = ("a", "posdef")

    def __init__(self, entries, require_posdef: bool = True):
        a = np.atleast_2d(np.asarray(entries, dtype=complex))
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError(f"expected a square matrix, got shape {a.shape}")
        scale = max(1.0, float(np.max(np.abs(a))))
        if np.max(np.abs(a - a.T)) > SYM_TOL * scale:
            raise ValidationError("matrix is not symmetric")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        posdef = bool(np.linalg.eigvalsh(a.real).min() > 0.0)
        if require_posdef and not posdef:
            raise DegenerateMatrix("real part is not positive definite")
        object.__setattr__(self, "posdef", posdef)

    def __setattr__(self, name, value):
        raise AttributeError("ComplexSymMatrix is immutable")

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def inv(self) -> "ComplexSymMatrix":
        return ComplexSymMatrix(np.linalg.inv(self.a), require_posdef=False)

    def conj(self) -> "ComplexSymMatrix":
        return ComplexSymMatrix(self.a.conj(), require_posdef=False)

    def shift(self, z: complex) -> "ComplexSymMatrix":
        """Return M + z Id."""
        return ComplexSymMatrix(self.a + z * np.eye(self.dim), require_posdef=False)

    def sqrt_det(self) -> complex:
        return sqrt_det_right_half(self.a)

    def min_real_eig(self) -> float:
        return float(np.linalg.eigvalsh(self.a.real).min())

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.a, dtype=dtype)

    def __repr__(self):
        return f"ComplexSymMatrix({self.a.tolist()!r})"


MatrixLike = Union[ComplexSymMatrix, np.ndarray, Sequence, complex, float]


def as_matrix(m: MatrixLike, require_posdef: bool = True) -> ComplexSymMatrix:
    if isinstance(m, ComplexSymMatrix):
        if require_posdef and not m.posdef:
            raise DegenerateMatrix("real part is not positive definite")
        return m
    return ComplexSymMatrix(m, require_posdef=require_posdef)


def sqrt_det_right_half(a) -> complex:
    """Analytic sqrt(det A) for a symmetric A with positive definite real part.

    Every eigenvalue of such a matrix lies in the open right half plane, and
    so does every eigenvalue along the segment from Id to A; the product of
    principal square roots is therefore the branch continued from Id.
    """
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    lam = np.linalg.eigvals(a)
    if np.any(lam.real <= 0):
        raise DegenerateMatrix("eigenvalue outside the right half plane")
    return complex(np.prod(np.sqrt(lam)))


def _det(m) -> complex:
    return complex(np.linalg.det(np.atleast_2d(np.asarray(m, dtype=complex))))


def _start_value(m0, start) -> complex:
    if start is not None:
        return complex(start)
    try:
        return sqrt_det_right_half(m0)
    except DegenerateMatrix:
        return complex(np.sqrt(_det(m0)))


def sqrt_det_analytic(
    path: Union[Callable[[float], np.ndarray], Sequence],
    endpoint: float = 1.0,
    start: complex | None = None,
    max_depth: int = 40,
) -> complex:
    """Square root of det continued along a path of invertible matrices.

    ``path`` is either a callable on [0, endpoint] or a sequence of sampled
    matrices.  A callable is sampled on 16 pieces, then refined by bisection until
    neighbouring determinant arguments differ by less than pi/4 and each
    piece's midpoint agrees; a sequence is taken as
    given and must not jump by pi/2 or more between samples.  The initial
    value is the right-half-plane branch when the first matrix has positive
    definite real part, otherwise ``start`` or the principal root.
    """
    if callable(path):
        m0 = path(0.0)
        d0 = _det(m0)
        if abs(d0) < SINGULAR_TOL:
            raise SingularOnPath(f"|det| = {abs(d0):.3e} at s = 0")
        root = _start_value(m0, start)
        total = 0.0
        # explicit stack of intervals, processed left to right
        d_end = _det(path(endpoint))
        if abs(d_end) < SINGULAR_TOL:
            raise SingularOnPath(f"|det| = {abs(d_end):.3e} at s = {endpoint}")
        # start from a uniform subdivision; an interval is accepted only when
        # its midpoint confirms the one-step argument jump
        grid = np.linspace(0.0, endpoint, INITIAL_PIECES + 1)
        dets = [d0] + [_det(path(s)) for s in grid[1:-1]] + [d_end]
        for s, dv in zip(grid, dets):
            if abs(dv) < SINGULAR_TOL:
                raise SingularOnPath(f"|det| = {abs(dv):.3e} at s = {s}")
        stack = [(grid[k], grid[k + 1], dets[k], dets[k + 1], 0)
                 for k in range(INITIAL_PIECES - 1, -1, -1)]
        while stack:
            a, b, da, db, depth = stack.pop()
            jump = np.angle(db / da)
            mid = 0.5 * (a + b)
            dm = _det(path(mid))
            if abs(dm) < SINGULAR_TOL:
                raise SingularOnPath(f"|det| = {abs(dm):.3e} at s = {mid}")
            halves = np.angle(dm / da) + np.angle(db / dm)
            if abs(jump) < np.pi / 4 and abs(halves - jump) < 1e-9:
                total += jump
                continue
            if depth >= max_depth:
                raise AmbiguousBranch(f"could not resolve determinant winding near s = {a}")
            stack.append((mid, b, dm, db, depth + 1))
            stack.append((a, mid, da, dm, depth + 1))
        mag = np.sqrt(abs(d_end))
        return complex(mag * np.exp(1j * (np.angle(root) + 0.5 * total)))

    mats = list(path)
    if not mats:
        raise ValidationError("empty path")
    dets = np.array([_det(m) for m in mats])
    small = np.abs(dets) < SINGULAR_TOL
    if np.any(small):
        raise SingularOnPath(f"|det| below {SINGULAR_TOL} at sample {int(np.argmax(small))}")
    root = _start_value(mats[0], start)
    jumps = np.angle(dets[1:] / dets[:-1])
    if np.any(np.abs(jumps) >= np.pi / 2):
        raise AmbiguousBranch("determinant argument jumps by pi/2 or more; refine the path")
    total = float(np.sum(jumps))
    return complex(np.sqrt(abs(dets[-1])) * np.exp(1j * (np.angle(root) + 0.5 * total)))
