import numpy as np
import pytest

from semiscat.errors import (AmbiguousBranch, DegenerateMatrix, DegreeCapExceeded,
                             SingularOnPath, ValidationError)
from semiscat.fourier import (fourier_gaussian_poly, inverse_fourier_gaussian_poly,
                              poly_asymptotic_largetime, stationary_phase_limit)
from semiscat.matrices import ComplexSymMatrix, sqrt_det_analytic
from semiscat.poly import MultiPoly, multi_indices


def x(d, j):
    return MultiPoly.variable(d, j)


# -- matrices ------------------------------------------------------------------

def test_matrix_is_symmetrized_and_immutable():
    m = ComplexSymMatrix([[1.0, 0.2 + 1j], [0.2 + 1j, 2.0]])
    assert np.array_equal(m.a, m.a.T)
    with pytest.raises(AttributeError):
        m.a = np.eye(2)
    with pytest.raises(ValueError):
        m.a[0, 0] = 3


def test_matrix_rejects_non_positive_real_part():
    with pytest.raises(DegenerateMatrix):
        ComplexSymMatrix([[1.0, 0.0], [0.0, -0.1 + 1j]])
    m = ComplexSymMatrix([[-1.0]], require_posdef=False)
    assert not m.posdef


def test_sqrt_det_real_positive_for_real_posdef():
    a = np.array([[2.0, 0.5], [0.5, 1.0]])
    v = ComplexSymMatrix(a).sqrt_det()
    assert abs(v.imag) < 1e-15 and v.real > 0
    assert abs(v ** 2 - np.linalg.det(a)) < 1e-12


def test_sqrt_det_constant_paths():
    assert sqrt_det_analytic([np.eye(2)] * 3) == pytest.approx(1.0)
    assert sqrt_det_analytic(lambda s: np.array([[4.0]])) == pytest.approx(2.0)


def test_sqrt_det_branch_fixture():
    # oracle: np.unwrap over 10^4 samples of 1 + it
    val = sqrt_det_analytic(lambda s: np.array([[1 + 1j * s]]))
    assert abs(val - (1.0986841134678098 + 0.45508986056222733j)) < 1e-12
    assert abs(val - 2 ** 0.25 * np.exp(1j * np.pi / 8)) < 1e-12


def test_sqrt_det_follows_winding():
    # det goes once around the origin: the root changes sign
    val = sqrt_det_analytic(lambda s: np.array([[np.exp(2j * np.pi * s)]]))
    assert abs(val + 1) < 1e-12


def test_sqrt_det_step_halving_stable():
    path = lambda s: np.array([[1 + 3j * s, 0.2], [0.2, 1 - 2j * s]])
    s1 = np.linspace(0, 1, 200)
    s2 = np.linspace(0, 1, 399)
    a = sqrt_det_analytic([path(s) for s in s1])
    b = sqrt_det_analytic([path(s) for s in s2])
    assert abs(a - b) < 1e-10
    assert abs(a - sqrt_det_analytic(path)) < 1e-10


def test_sqrt_det_errors():
    with pytest.raises(SingularOnPath):
        sqrt_det_analytic(lambda s: np.array([[1 - s]]))
    with pytest.raises(AmbiguousBranch):
        sqrt_det_analytic([np.array([[1.0]]), np.array([[1j]])])


# -- polynomials -----------------------------------------------------------------

def test_poly_degree_and_zero():
    p = MultiPoly(2, {(1, 2): 1.0, (0, 0): 3.0})
    assert p.degree() == 3
    assert MultiPoly.zero(2).degree() == -np.inf
    assert (p - p).is_zero()


def test_poly_arithmetic_and_eval():
    p = x(2, 0) * x(2, 1) + 1.0
    assert p(np.array([2.0, 3.0])) == 7
    q = p * p
    pts = np.random.default_rng(0).normal(size=(5, 2))
    assert np.allclose(q(pts), p(pts) ** 2)
    assert np.allclose(p.derivative(0)(pts), pts[:, 1])
    assert np.allclose(p.reflect()(pts), p(-pts))


def test_poly_degree_cap():
    with pytest.raises(DegreeCapExceeded):
        MultiPoly(1, {(17,): 1.0})
    with pytest.raises(ValidationError):
        MultiPoly(2, {(1,): 1.0})


def test_multi_indices_count():
    assert len(multi_indices(2, 3)) == 10
    assert len(multi_indices(3, 2)) == 10


def test_poly_compose_linear():
    p = x(2, 0) ** 2 if hasattr(MultiPoly, "__pow__") else x(2, 0) * x(2, 0)
    lin = np.array([[1.0, 2.0], [0.5, -1.0]])
    q = p.compose_linear(lin)
    pts = np.random.default_rng(1).normal(size=(4, 2))
    assert np.allclose(q(pts), p(pts @ lin.T))


# -- P_Gamma -------------------------------------------------------------------------

def test_fourier_constant():
    img = fourier_gaussian_poly(MultiPoly.constant(2), np.eye(2))
    assert img.max_coeff_diff(MultiPoly.constant(2, 2 * np.pi)) < 1e-14


def test_fourier_linear_fixture():
    # oracle: trapezoid quadrature on [-12, 12] gives -1.7546397922417005j at xi = 0.7
    img = fourier_gaussian_poly(x(1, 0), np.eye(1))
    assert abs(img(np.array([0.7])) - (-1.7546397922417005j)) < 1e-8
    assert img.max_coeff_diff(MultiPoly(1, {(1,): -1j * np.sqrt(2 * np.pi)})) < 1e-14


def test_fourier_against_quadrature_complex_gamma():
    g = 0.8 + 0.5j
    p = MultiPoly(1, {(0,): 0.3, (2,): 1.0 - 0.5j, (3,): 0.2})
    img = fourier_gaussian_poly(p, np.array([[g]]))
    xs = np.linspace(-15, 15, 60001)
    for xi in (-0.9, 0.4, 1.7):
        f = np.exp(-1j * xs * xi) * p(xs[:, None]) * np.exp(-g * xs ** 2 / 2)
        ref = np.trapezoid(f, xs) * np.exp(xi ** 2 / (2 * g))
        assert abs(img(np.array([xi])) - ref) < 1e-8


def test_fourier_double_transform():
    p = 1.0 + x(2, 0) * x(2, 1)
    g = ComplexSymMatrix(np.eye(2))
    twice = fourier_gaussian_poly(fourier_gaussian_poly(p, g), g.inv())
    assert twice.max_coeff_diff(p.reflect() * (2 * np.pi) ** 2) < 1e-12


def test_inverse_examples():
    p = inverse_fourier_gaussian_poly(MultiPoly.constant(2, 2 * np.pi), np.eye(2))
    assert p.max_coeff_diff(MultiPoly.constant(2)) < 1e-14
    p = inverse_fourier_gaussian_poly(x(1, 0), np.eye(1))
    assert p.max_coeff_diff(MultiPoly(1, {(1,): 1j / np.sqrt(2 * np.pi)})) < 1e-14


def test_inverse_round_trip_degree3():
    rng = np.random.default_rng(3)
    g = (1 + 0.3j) * np.eye(2)
    p = MultiPoly.random(2, 3, rng)
    back = inverse_fourier_gaussian_poly(fourier_gaussian_poly(p, g), g)
    assert back.max_coeff_diff(p) < 1e-12


def test_fourier_rejects_degenerate():
    with pytest.raises(DegenerateMatrix):
        fourier_gaussian_poly(MultiPoly.constant(1), np.array([[-1.0 + 1j]]))


def test_largetime_constant_closed_form():
    g = ComplexSymMatrix([[1.0 + 0.2j, 0.1], [0.1, 0.7]])
    t = 5.0
    val = poly_asymptotic_largetime(MultiPoly.constant(2), g, [0.6, 0.8], t)
    assert abs(val - 2 * np.pi / g.shift(1j * t).sqrt_det()) < 1e-12


def test_largetime_asymptote_1e3():
    val = poly_asymptotic_largetime(MultiPoly.constant(1), np.eye(1), [1.0], 1e3)
    lim = stationary_phase_limit(MultiPoly.constant(1), [1.0], 1e3)
    assert abs(val / lim - 1) < 1e-2


def test_matrix_largetime_expansion_slope():
    g = np.array([[1.0 + 0.4j, 0.3], [0.3, 0.8 - 0.1j]])
    ts = np.array([1e2, 1e3, 1e4])
    errs = [np.abs(np.linalg.inv(g + 1j * t * np.eye(2)) - (-1j / t * np.eye(2) + g / t ** 2)).max()
            for t in ts]
    slope = np.polyfit(np.log(ts), np.log(errs), 1)[0]
    assert abs(slope + 3) < 0.2
