import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from bfheat.trigpoly import TrigPoly, random_trigpoly

X = np.linspace(-np.pi, np.pi, 257)


def poly(seed, degree=6, **kw):
    return random_trigpoly(degree, np.random.default_rng(seed), **kw)


def test_constructors_evaluate_correctly():
    np.testing.assert_allclose(TrigPoly.cos(3)(X), np.cos(3 * X), atol=1e-14)
    np.testing.assert_allclose(TrigPoly.sin(2)(X), np.sin(2 * X), atol=1e-14)
    np.testing.assert_allclose(TrigPoly.exp(-1)(X), np.exp(-1j * X), atol=1e-14)
    assert TrigPoly.constant(2.5)(0.3) == 2.5
    assert TrigPoly.from_modes({2: 1, -2: 1})[2] == 1 and TrigPoly.exp(1)[5] == 0


def test_even_length_rejected():
    with pytest.raises(ValueError):
        TrigPoly([1.0, 2.0])


def test_coefficients_are_read_only():
    p = TrigPoly.cos(1)
    with pytest.raises(ValueError):
        p.coeffs[0] = 3


def test_arithmetic_matches_pointwise():
    p, q = poly(1, 4, real=False, zero_mean=False), poly(2, 7, real=False, zero_mean=False)
    np.testing.assert_allclose((p + q)(X), p(X) + q(X), atol=1e-13)
    np.testing.assert_allclose((p - q)(X), p(X) - q(X), atol=1e-13)
    np.testing.assert_allclose((p * q)(X), p(X) * q(X), atol=1e-12)
    np.testing.assert_allclose((2j * p)(X), 2j * p(X), atol=1e-13)
    np.testing.assert_allclose((p / 4)(X), p(X) / 4, atol=1e-13)
    np.testing.assert_allclose((1 - p)(X), 1 - p(X), atol=1e-13)
    np.testing.assert_allclose(p.conj()(X), np.conj(p(X)), atol=1e-13)


def test_calculus_matches_analytic_derivatives():
    p = TrigPoly.cos(2) + 3 * TrigPoly.sin(1)
    np.testing.assert_allclose(p.derivative()(X), -2 * np.sin(2 * X) + 3 * np.cos(X), atol=1e-13)
    q = poly(3, real=False, zero_mean=False)
    np.testing.assert_allclose(q.mul_sin()(X), np.sin(X) * q(X), atol=1e-13)
    np.testing.assert_allclose(q.mul_cos()(X), np.cos(X) * q(X), atol=1e-13)
    np.testing.assert_allclose(q.reflect()(X), q(np.pi - X), atol=1e-12)
    assert q.mul_sin().degree == q.degree + 1


def test_integrate_against_quad():
    q = poly(4, real=True, zero_mean=False)
    for a, b in [(0, np.pi), (-np.pi, 0), (-1.0, 2.5)]:
        ref = quad(lambda t: q(t).real, a, b, epsabs=1e-13)[0]
        assert q.integrate(a, b) == pytest.approx(ref, abs=1e-11)


def test_norm_and_inner_against_quadrature():
    p, q = poly(5, real=False), poly(6, real=False)
    K = 10_000
    x = -np.pi + 2 * np.pi * np.arange(K) / K
    h = 2 * np.pi / K
    assert p.norm() == pytest.approx(np.sqrt(h * np.sum(np.abs(p(x)) ** 2)), rel=1e-12)
    assert p.inner(q) == pytest.approx(h * np.sum(p(x) * np.conj(q(x))), rel=1e-12, abs=1e-12)
    assert TrigPoly.exp(3).norm() ** 2 == pytest.approx(2 * np.pi)


def test_structure_helpers():
    p = TrigPoly.cos(1).padded(4)
    assert p.degree == 4 and p.trimmed().degree == 1
    with pytest.raises(ValueError):
        p.padded(2)
    assert TrigPoly.constant(3).mean == 3
    assert TrigPoly.cos(2).is_real() and not TrigPoly.exp(1).is_real()
    assert TrigPoly.cos(1).max_abs_diff(TrigPoly.cos(1).padded(3)) == 0


def test_csv_round_trip():
    p = poly(7, real=False, zero_mean=False)
    text = p.to_csv({"source": "test"})
    assert text.splitlines()[1] == "n,re,im"
    q = TrigPoly.from_csv(text)
    assert q.max_abs_diff(p) == 0


@given(st.integers(1, 25), st.integers(0, 2**32 - 1))
def test_random_trigpoly_distribution(degree, seed):
    p = random_trigpoly(degree, np.random.default_rng(seed))
    assert p.degree == degree and p.mean == 0 and p.is_real()
    assert np.all(np.abs(p.coeffs) <= 1)
    q = random_trigpoly(degree, np.random.default_rng(seed), real=False, zero_mean=False)
    assert np.all(np.abs(q.coeffs) <= 1)


def test_random_trigpoly_is_reproducible():
    assert poly(11).max_abs_diff(poly(11)) == 0
