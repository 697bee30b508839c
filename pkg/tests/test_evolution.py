import warnings

import mpmath as mp
import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from bfheat import evolution
from bfheat.eigen import eigenvalues, match_spectra
from bfheat.errors import EigendecompositionIllConditioned, InvalidEpsilon
from bfheat.evolution import (
    evolve,
    galerkin_matrix,
    propagate,
    propagator,
    transient_growth,
)
from bfheat.expm import expm_pade, expm_pade_lognorm
from bfheat.fourier import build_A
from bfheat.physical import apply_L
from bfheat.trigpoly import TrigPoly, random_trigpoly

X = np.linspace(-np.pi, np.pi, 101)

# ||exp(-i t A_N^T)||_2 at eps=0.5, t=1 from mpmath.expm and mpmath.svd at 80 digits
GROWTH_EPS05_T1 = {8: 76125198.37218109, 16: 2.2812980281564864e38,
                   32: 2.57004285544615e174}


# ------------------------------------------------------------------ Pade expm


@pytest.mark.parametrize("scale", [1e-3, 0.2, 0.9, 2.0, 5.0, 40.0])
def test_expm_against_scipy(scale, rng):
    A = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
    A *= scale / np.linalg.norm(A, 1)
    ref = scipy.linalg.expm(A)
    assert np.max(np.abs(expm_pade(A) - ref)) <= 1e-13 * max(1, np.abs(ref).max())


def test_expm_real_and_trivial(rng):
    A = rng.standard_normal((6, 6))
    E = expm_pade(A)
    assert E.dtype == float
    np.testing.assert_allclose(E, scipy.linalg.expm(A), rtol=1e-13, atol=1e-14)
    np.testing.assert_array_equal(expm_pade(np.zeros((3, 3))), np.eye(3))
    with pytest.raises(ValueError):
        expm_pade(np.ones((2, 3)))


def test_expm_lognorm_matches_direct():
    P = 1j * build_A(16, 0.5).to_dense().T
    Q, logc = expm_pade_lognorm(-P)
    E = expm_pade(-P)
    assert np.linalg.norm(Q, 2) == pytest.approx(1, rel=1e-12)
    assert logc == pytest.approx(np.log(np.linalg.norm(E, 2)), rel=1e-12)
    np.testing.assert_allclose(np.exp(logc) * Q, E, rtol=1e-9, atol=1e-9 * np.abs(E).max())


# ------------------------------------------------------------- Galerkin matrix


def test_constant_column_is_zero():
    G = galerkin_matrix(5, 0.9).dense()
    assert np.all(G[:, 5] == 0)


def test_positive_block_N2():
    e = 0.6
    G = galerkin_matrix(2, e)
    np.testing.assert_array_equal(G.positive_block(), 1j * np.array([[1, -e], [e, 2]]))
    np.testing.assert_array_equal(G.positive_block(), 1j * build_A(2, e).to_dense().T)


@given(st.integers(1, 60), st.floats(0.01, 1.99))
def test_sector_structure_is_exact(N, eps):
    G = galerkin_matrix(N, eps)
    At = build_A(N, eps).to_dense().T
    assert G.off_sector_residual() == 0
    assert np.max(np.abs(G.positive_block() - 1j * At)) <= 1e-15
    assert np.max(np.abs(G.negative_block() + 1j * At)) <= 1e-15
    assert [len(v) for v in G.sector_map.values()] == [N, 1, N]


def test_columns_follow_pointwise_operator():
    # Fourier coefficients of L e^{inx} from samples, independent of the recurrence
    eps, N, K = 0.8, 4, 32
    x = 2 * np.pi * np.arange(K) / K
    G = galerkin_matrix(N, eps).dense()
    for n in range(-N, N + 1):
        f = (eps * (1j * n * np.cos(x) - n * n * np.sin(x)) + 1j * n) * np.exp(1j * n * x)
        c = np.fft.fft(f) / K
        for m in range(-N, N + 1):
            assert abs(c[m % K] - G[m + N, n + N]) <= 1e-12


def test_full_spectrum_is_zero_and_pm_i_spec_A():
    N, eps = 20, 0.7
    lam_A = eigenvalues(build_A(N, eps)).eigenvalues
    expected = np.concatenate(([0], 1j * lam_A, -1j * lam_A))
    lam_G = np.linalg.eigvals(galerkin_matrix(N, eps).dense())
    assert match_spectra(lam_G, expected) <= 1e-9 * np.abs(expected).max()


def test_galerkin_validates_eps():
    with pytest.raises(InvalidEpsilon):
        galerkin_matrix(4, 2.0)


# ------------------------------------------------------------------ propagation


@pytest.mark.parametrize("method", ["eigen", "scaling_squaring"])
def test_constants_are_fixed(method):
    one = TrigPoly.constant(1.0)
    for t in (0.0, 0.5, 3.0):
        assert propagate(one, t, 6, 0.9, method).max_abs_diff(one.padded(6)) == 0


@pytest.mark.parametrize("method", ["eigen", "scaling_squaring"])
def test_transport_limit(method):
    y = propagate(TrigPoly.cos(1), 1.0, 8, 1e-12, method)
    assert np.max(np.abs(y(X) - np.cos(X - 1))) <= 1e-8


def test_zero_time_is_identity(rng):
    y0 = random_trigpoly(5, rng)
    y, info = propagate(y0, 0.0, 5, 0.4, return_info=True)
    assert y.max_abs_diff(y0) == 0 and not info.fallback


def test_methods_agree(rng):
    for N in (4, 8):
        y0 = random_trigpoly(N, rng)
        a = propagate(y0, 0.7, N, 0.5, "eigen")
        b = propagate(y0, 0.7, N, 0.5, "scaling_squaring")
        assert a.max_abs_diff(b) <= 1e-8 * max(1.0, b.norm())


def test_against_high_precision_exponential(rng):
    N, eps, t = 6, 0.5, 0.8
    y0 = random_trigpoly(N, rng, real=False, zero_mean=False)
    mp.mp.dps = 40
    P = mp.matrix((1j * build_A(N, eps).to_dense().T).tolist())
    E = mp.expm(-t * P)
    pos = E * mp.matrix(list(y0.coeffs[N + 1:]))
    neg = E.conjugate() * mp.matrix(list(y0.coeffs[:N][::-1]))
    ref = np.array([complex(v) for v in neg][::-1] + [y0.coeffs[N]] + [complex(v) for v in pos])
    for method in ("eigen", "scaling_squaring"):
        y = propagate(y0, t, N, eps, method)
        assert np.max(np.abs(y.coeffs - ref)) <= 1e-10 * np.abs(ref).max()


def test_taylor_slope(rng):
    N, eps = 12, 0.5
    y0 = random_trigpoly(6, rng)
    hs = np.array([1e-2, 1e-3, 1e-4])
    errs = np.array([(propagate(y0, h, N, eps) - (y0 - h * apply_L(y0, eps))).norm()
                     for h in hs])
    order = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert order >= 1.9
    C = errs / hs**2
    assert C.max() / C.min() < 1.2


@given(st.floats(0.05, 1.95), st.integers(0, 2**32 - 1))
def test_flow_invariants(eps, seed):
    rng = np.random.default_rng(seed)
    N = 6
    y0 = random_trigpoly(N, rng, zero_mean=False)
    s, t = 0.2, 0.3
    ys = propagate(y0, s, N, eps)
    yst = propagate(y0, s + t, N, eps)
    scale = max(1.0, yst.norm())
    assert propagate(ys, t, N, eps).max_abs_diff(yst) <= 1e-8 * scale
    assert abs(yst.mean - y0.mean) <= 1e-14
    assert np.max(np.abs(yst.coeffs - np.conj(yst.coeffs[::-1]))) <= 1e-12 * scale


def test_propagate_validation():
    with pytest.raises(ValueError):
        propagate(TrigPoly.cos(5), 1.0, 4, 0.5)
    with pytest.raises(ValueError):
        propagate(TrigPoly.cos(1), -1.0, 4, 0.5)
    with pytest.raises(ValueError):
        propagate(TrigPoly.cos(1), 1.0, 4, 0.5, method="taylor")


def test_ill_conditioned_fallback(monkeypatch, rng):
    monkeypatch.setattr(evolution, "EIGEN_COND_LIMIT", 1.0)
    y0 = random_trigpoly(4, rng)
    with pytest.warns(EigendecompositionIllConditioned):
        y, info = propagate(y0, 0.5, 4, 0.5, "eigen", return_info=True)
    assert info.fallback and info.method == "scaling_squaring"
    ref = propagate(y0, 0.5, 4, 0.5, "scaling_squaring")
    assert y.max_abs_diff(ref) == 0


def test_well_conditioned_no_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        info = propagator(0.5, 6, 0.5)
    assert info.method == "eigen" and info.eigvec_cond < 1e8


# ---------------------------------------------------------------- growth


def test_growth_trivial_cases():
    assert transient_growth(0.0, 16, 0.5) == 1.0
    for t in (0.5, 2.0):
        assert transient_growth(t, 24, 1e-12) == pytest.approx(1, abs=1e-8)


@pytest.mark.parametrize("N", sorted(GROWTH_EPS05_T1))
def test_growth_against_high_precision(N):
    ref = GROWTH_EPS05_T1[N]
    assert transient_growth(1.0, N, 0.5, log=True) == pytest.approx(np.log(ref), rel=1e-10)
    assert transient_growth(1.0, N, 0.5) == pytest.approx(ref, rel=1e-8)


def test_growth_trend_in_N():
    logs = [transient_growth(1.0, N, 0.5, log=True) for N in (32, 64, 128)]
    assert all(np.isfinite(logs)) and logs[0] < logs[1] < logs[2]
    assert transient_growth(1.0, 64, 0.5) == np.inf


def test_growth_matches_propagator_svd():
    E = propagator(0.4, 10, 0.9, "scaling_squaring").matrix
    assert transient_growth(0.4, 10, 0.9) == pytest.approx(np.linalg.norm(E, 2), rel=1e-10)


# ------------------------------------------------------------------ traces


def test_evolve_trace(rng):
    y0 = random_trigpoly(3, rng)
    trace = evolve(y0, [0, 0.1, 0.2], 6, 0.5)
    assert trace.times[0] == 0 and trace.states[0].max_abs_diff(y0) == 0
    assert trace.growth[0] == 1 and trace.norms[0] == pytest.approx(y0.norm())
    lines = trace.to_csv().splitlines()
    header = lines[1].split(",")
    assert header[0] == "t" and header[-2:] == ["norm", "growth"] and len(header) == 1 + 13 + 2
    assert len(lines) == 2 + 3
    with pytest.raises(ValueError):
        evolve(y0, [0.1, 0.2], 6, 0.5)
    with pytest.raises(ValueError):
        evolve(y0, [0, 0.2, 0.1], 6, 0.5)
