from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bfheat.errors import InvalidEpsilon, InvalidOrder
from bfheat.fourier import (
    build_A,
    build_B,
    build_C,
    build_J,
    build_M_matrix,
    check_factorization,
    check_J_selfadjoint,
    sequence_norm,
)
from bfheat.tridiag import Label

EPSILONS = [0.1, 0.5, 1.0, 1.5, 1.9]


def fft_modes(f, K=64):
    """Fourier coefficients of a smooth periodic function from K samples."""
    x = 2 * np.pi * np.arange(K) / K
    c = np.fft.fft(f(x)) / K
    return {n: c[n % K] for n in range(-K // 2 + 1, K // 2)}


def L_exp_pointwise(n, eps):
    # eps*(sin x y')' + y' = eps*(cos x y' + sin x y'') + y' with y = e^{inx}
    return lambda x: (eps * (np.cos(x) * 1j * n - np.sin(x) * n**2) + 1j * n) * np.exp(1j * n * x)


def test_A_corner():
    e = 0.37
    A = build_A(4, e)
    np.testing.assert_array_equal(A.diag, [1, 2, 3, 4])
    np.testing.assert_allclose(A.sup, [e, 3 * e, 6 * e], rtol=1e-15)
    np.testing.assert_allclose(A.sub, [-e, -3 * e, -6 * e], rtol=1e-15)
    assert A.label is Label.A


def test_A_entry_56():
    assert build_A(6, 1.0).to_dense()[4, 5] == 15


def test_A_small_eps_is_diagonal():
    A = build_A(4, 1e-12)
    assert np.max(np.abs(A.sup)) <= 1e-11 and np.max(np.abs(A.sub)) <= 1e-11
    np.testing.assert_array_equal(A.diag, [1, 2, 3, 4])


@pytest.mark.parametrize("eps", [0.3, 1.2])
def test_A_bands_match_pointwise_operator(eps):
    # column n of A^T lists how L e^{inx} spreads over modes: the sector
    # correspondence says i*A^T is the matrix of L on positive modes
    N = 8
    A = build_A(N, eps).to_dense()
    for n in range(1, N + 1):
        modes = fft_modes(L_exp_pointwise(n, eps))
        for m in range(1, N + 1):
            assert abs(modes[m] - 1j * A[n - 1, m - 1]) < 1e-12
        assert abs(modes[n - 1] - (-1j * eps * n * (n - 1) / 2)) < 1e-12


def test_B_corner():
    e = 0.8
    B = build_B(4, e).to_dense()
    expected = [[1, e / 2, 0, 0], [-e, 1, e, 0], [0, -3 * e / 2, 1, 3 * e / 2],
                [0, 0, -2 * e, 1]]
    np.testing.assert_allclose(B, expected, rtol=1e-15)
    np.testing.assert_array_equal(build_C(4).to_dense(), np.diag([1, 2, 3, 4]))


def test_B_small_eps_is_identity():
    assert np.max(np.abs(build_B(4, 1e-12).to_dense() - np.eye(4))) <= 1e-11


def test_B_entry_from_solving_BC_equals_A():
    A = build_A(5, 1.0).to_dense()
    # B = A C^{-1} column by column, independent of the B formulas
    oracle = A / np.arange(1, 6)[None, :]
    assert oracle[4, 3] == -2.5
    assert build_B(5, 1.0).to_dense()[4, 3] == -2.5


def test_J_pattern():
    np.testing.assert_array_equal(build_J(5).diag, [-1, 1, -1, 1, -1])
    assert build_J(5).label is Label.J


@pytest.mark.parametrize("builder", [build_A, build_B])
@pytest.mark.parametrize("eps", [0.0, 2.0, -0.1, 3.0, float("nan")])
def test_eps_validation(builder, eps):
    with pytest.raises(InvalidEpsilon, match=r"\(0, 2\)"):
        builder(4, eps)


def test_eps_override_gives_diagonal_at_zero():
    A = build_A(6, 0.0, allow_out_of_range=True)
    np.testing.assert_array_equal(A.to_dense(), np.diag(np.arange(1.0, 7.0)))


@pytest.mark.parametrize("N", [0, -3])
def test_order_validation(N):
    with pytest.raises(InvalidOrder):
        build_A(N, 0.5)
    with pytest.raises(InvalidOrder):
        build_C(N)


def test_factorization_examples():
    assert check_factorization(4, 0.7) <= 1e-15
    assert check_factorization(1, 1.3) == 0
    assert check_factorization(500, 1.9, relative=True) <= 1e-13


@pytest.mark.parametrize("eps", EPSILONS)
@pytest.mark.parametrize("N", [4, 64, 500])
def test_factorization_grid(eps, N):
    assert check_factorization(N, eps, relative=True) <= 1e-13


def test_factorization_against_dense_product():
    A, B, C = build_A(40, 1.1), build_B(40, 1.1), build_C(40)
    dense = np.max(np.abs(A.to_dense() - B.to_dense() @ C.to_dense()))
    assert dense <= 1e-13 * np.max(np.abs(A.to_dense()))


@pytest.mark.parametrize("eps", [Fraction(1, 3), Fraction(7, 10), 0.7, 1.9])
def test_factorization_exact(eps):
    res = check_factorization(50, eps, exact=True)
    assert isinstance(res, Fraction) and res == 0


def test_factorization_detects_fault():
    B = build_B(10, 1.0)
    sup = B.sup.copy()
    sup[3] = -sup[3]
    from bfheat.tridiag import TridiagonalMatrix
    bad = TridiagonalMatrix(B.diag, sup, B.sub)
    assert check_factorization(10, 1.0, B=bad) > 1


@pytest.mark.parametrize("N,eps", [(4, 1.0), (1, 0.4), (300, 0.3)] +
                         [(N, e) for N in (4, 64, 500) for e in EPSILONS])
def test_J_selfadjoint(N, eps):
    assert check_J_selfadjoint(N, eps) <= 1e-15


def test_J_selfadjoint_dense_oracle():
    A = build_A(30, 0.9).to_dense()
    J = np.diag([(-1.0) ** n for n in range(1, 31)])
    assert np.max(np.abs(J @ A.T @ J - A)) == 0
    assert check_J_selfadjoint(30, Fraction(9, 10), exact=True) == 0


def test_M_matrix_columns():
    e = 0.6
    M = build_M_matrix(3, e).to_dense()      # modes -3..3, mode 0 at index 3
    col0 = M[:, 3]
    assert col0[3] == 1 and col0[4] == pytest.approx(e / 2) and col0[2] == pytest.approx(e / 2)
    col1 = M[:, 4]
    assert col1[4] == 1 and col1[5] == pytest.approx(e) and col1[3] == 0
    assert M[3, 2] == 0                       # column -1 does not reach row 0


@pytest.mark.parametrize("n", [-3, -1, 0, 1, 2])
def test_M_matrix_against_pointwise(n):
    e = 1.3
    M = build_M_matrix(4, e).to_dense()
    f = lambda x: (e * (np.cos(x) + 1j * n * np.sin(x)) + 1) * np.exp(1j * n * x)
    modes = fft_modes(f)
    for m in range(-4, 5):
        assert abs(modes[m] - M[m + 4, n + 4]) < 1e-13


def test_M_matrix_small_eps():
    M = build_M_matrix(10, 1e-12).to_dense()
    assert np.max(np.abs(M - np.eye(21))) <= 1e-11


def test_M_matrix_mean_row(rng):
    M = build_M_matrix(12, 1.7)
    y = rng.standard_normal(25) + 1j * rng.standard_normal(25)
    assert (M @ y)[12] == y[12]


def brute_sequence_norm(f):
    f = [0j] + list(f) + [0j]
    N = len(f) - 2
    total = 0.0
    for n in range(1, N + 1):
        total += n * n * (abs(f[n]) ** 2 + abs((n + 1) * f[n + 1] - (n - 1) * f[n - 1]) ** 2)
    return total ** 0.5


def test_sequence_norm_examples():
    assert sequence_norm(np.zeros(5)) == 0
    assert sequence_norm([1, 0, 0, 0]) == pytest.approx(np.sqrt(5), rel=1e-15)
    # e_2 with N=4: n=1 gives 1*|2|^2, n=2 gives 4*1, n=3 gives 9*|-2|^2
    assert sequence_norm([0, 1, 0, 0]) == pytest.approx(np.sqrt(44), rel=1e-15)
    assert sequence_norm([0, 1, 0, 0]) == pytest.approx(brute_sequence_norm([0, 1, 0, 0]))


def test_sequence_norm_rejects_nonfinite():
    with pytest.raises(ValueError):
        sequence_norm([1.0, np.inf])


vectors = st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                   min_size=1, max_size=12)


@given(vectors)
def test_sequence_norm_matches_brute_force(f):
    assert sequence_norm(f) == pytest.approx(brute_sequence_norm(f), rel=1e-12, abs=1e-12)


@given(vectors, st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_sequence_norm_homogeneous(f, a):
    assert sequence_norm(np.array(f) * a) == pytest.approx(abs(a) * sequence_norm(f),
                                                           rel=1e-12, abs=1e-10)


@given(st.integers(1, 12).flatmap(lambda n: st.tuples(
    st.lists(st.floats(-10, 10), min_size=n, max_size=n),
    st.lists(st.floats(-10, 10), min_size=n, max_size=n))))
def test_sequence_norm_triangle(pair):
    f, g = map(np.array, pair)
    assert sequence_norm(f + g) <= sequence_norm(f) + sequence_norm(g) + 1e-9


@given(st.integers(1, 40), st.floats(0.01, 1.99))
def test_identities_hold_for_all_orders(N, eps):
    assert check_factorization(N, eps, relative=True) <= 1e-13
    assert check_J_selfadjoint(N, eps) <= 1e-15
