"""Fourier calculus of polynomial-times-Gaussian functions.

With the convention F f(xi) = \\int e^{-i x.xi} f(x) dx, for every polynomial
P and every symmetric Gamma with Re Gamma > 0 there is a unique polynomial
P_Gamma of the same degree with

    F(P(x) exp(-x.Gamma x / 2))(xi) = P_Gamma(xi) exp(-xi.Gamma^{-1} xi / 2).

It is computed exactly from the Gaussian image of the constant 1 and the rule
F(x_j f) = i d/dxi_j F(f).
"""
from __future__ import annotations

import numpy as np

from .matrices import MatrixLike, as_matrix
from .poly import MultiPoly, multi_indices


def _raise_operator(q: MultiPoly, ginv: np.ndarray, j: int) -> MultiPoly:
    """Image of multiplication by x_j: Q -> i (d_j Q - (Gamma^{-1} xi)_j Q)."""
    d = q.dim
    out = q.derivative(j)
    for k in range(d):
        if ginv[j, k] != 0:
            out = out - q.mul_var(k) * ginv[j, k]
    return out * 1j


def fourier_gaussian_poly(p: MultiPoly, gamma: MatrixLike) -> MultiPoly:
    """Return P_Gamma."""
    g = as_matrix(gamma)
    if g.dim != p.dim:
        raise ValueError("dimension mismatch between polynomial and matrix")
    ginv = np.linalg.inv(g.a)
    d = p.dim
    base = (2 * np.pi) ** (d / 2) / g.sqrt_det()
    images = {(0,) * d: MultiPoly.constant(d, base)}

    def image(alpha):
        if alpha not in images:
            j = next(k for k in range(d) if alpha[k] > 0)
            lower = list(alpha)
            lower[j] -= 1
            images[alpha] = _raise_operator(image(tuple(lower)), ginv, j)
        return images[alpha]

    out = MultiPoly.zero(d)
    for alpha in sorted(a for a, _ in p.items()):
        out = out + image(alpha) * p.coeff(alpha)
    return out


def inverse_fourier_gaussian_poly(q: MultiPoly, gamma: MatrixLike) -> MultiPoly:
    """Return P with P_Gamma = Q.

    The images of the monomials x^alpha, |alpha| <= deg Q, form a block
    triangular system (each image has the degree of its monomial); it is
    solved directly.
    """
    d = q.dim
    if q.is_zero():
        return MultiPoly.zero(d)
    n = int(q.degree())
    basis = multi_indices(d, n)
    index = {a: i for i, a in enumerate(basis)}
    g = as_matrix(gamma)
    mat = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, alpha in enumerate(basis):
        img = fourier_gaussian_poly(MultiPoly(d, {alpha: 1.0}), g)
        for beta, v in img.items():
            mat[index[beta], col] = v
    rhs = np.array([q.coeff(a) for a in basis], dtype=complex)
    sol = np.linalg.solve(mat, rhs)
    return MultiPoly(d, {a: sol[i] for i, a in enumerate(basis)})


def poly_asymptotic_largetime(p: MultiPoly, gamma: MatrixLike, xi, t: float) -> complex:
    """Exact value of P_{Gamma + i t Id}(t xi).

    For large t this approaches exp(-i d pi/4) P(-xi) (2 pi / t)^{d/2}; see
    :func:`stationary_phase_limit`.
    """
    g = as_matrix(gamma)
    shifted = g.shift(1j * t)
    img = fourier_gaussian_poly(p, shifted)
    return img(t * np.asarray(xi, dtype=float))


def stationary_phase_limit(p: MultiPoly, xi, t: float) -> complex:
    d = p.dim
    return complex(np.exp(-1j * d * np.pi / 4) * p(-np.asarray(xi, dtype=float))
                   * (2 * np.pi / t) ** (d / 2))
