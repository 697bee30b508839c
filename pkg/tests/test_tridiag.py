from fractions import Fraction

import numpy as np
import pytest

from bfheat.errors import DimensionMismatch, Singular
from bfheat.tridiag import Label, TridiagonalMatrix


def random_tridiag(rng, n, complex_=False):
    def band(k):
        v = rng.standard_normal(k)
        return v + 1j * rng.standard_normal(k) if complex_ else v
    return TridiagonalMatrix(band(n) + 4, band(n - 1), band(n - 1))


def test_band_lengths_are_checked():
    with pytest.raises(DimensionMismatch):
        TridiagonalMatrix([1.0, 2.0], [1.0, 2.0], [1.0])


def test_dense_layout():
    T = TridiagonalMatrix([1.0, 2.0, 3.0], [10.0, 20.0], [-1.0, -2.0])
    np.testing.assert_array_equal(T.to_dense(), [[1, 10, 0], [-1, 2, 20], [0, -2, 3]])
    np.testing.assert_array_equal(T.T.to_dense(), T.to_dense().T)


@pytest.mark.parametrize("complex_", [False, True])
def test_matvec_and_solve_against_dense(rng, complex_):
    T = random_tridiag(rng, 30, complex_)
    x = rng.standard_normal(30)
    np.testing.assert_allclose(T @ x, T.to_dense() @ x, rtol=1e-14, atol=1e-13)
    X = rng.standard_normal((30, 3))
    np.testing.assert_allclose(T @ X, T.to_dense() @ X, rtol=1e-14, atol=1e-13)
    np.testing.assert_allclose(T.solve(x), np.linalg.solve(T.to_dense(), x), rtol=1e-12)


def test_solve_singular():
    T = TridiagonalMatrix([0.0, 0.0], [0.0], [0.0])
    with pytest.raises(Singular):
        T.solve(np.ones(2))


def test_exact_entries_stay_fractions():
    T = TridiagonalMatrix(np.array([Fraction(1, 3), Fraction(2)], dtype=object),
                          np.array([Fraction(1, 7)], dtype=object),
                          np.array([Fraction(-1, 2)], dtype=object))
    assert T.exact
    y = T @ np.array([Fraction(3), Fraction(1)], dtype=object)
    assert list(y) == [Fraction(1) + Fraction(1, 7), Fraction(-3, 2) + 2]


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_round_trip_float(rng, fmt):
    T = TridiagonalMatrix(rng.standard_normal(5), rng.standard_normal(4),
                          rng.standard_normal(4), Label.B, 0.3, first_index=-2)
    text = T.to_csv() if fmt == "csv" else T.to_json()
    U = TridiagonalMatrix.from_csv(text) if fmt == "csv" else TridiagonalMatrix.from_json(text)
    np.testing.assert_array_equal(U.to_dense(), T.to_dense())
    assert (U.label, U.epsilon, U.first_index) == (Label.B, 0.3, -2)


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_round_trip_exact(fmt):
    F = Fraction
    T = TridiagonalMatrix(np.array([F(1), F(2), F(3)], dtype=object),
                          np.array([F(1, 3), F(1)], dtype=object),
                          np.array([F(-1, 3), F(-1)], dtype=object), Label.A, F(2, 3))
    text = T.to_csv() if fmt == "csv" else T.to_json()
    U = TridiagonalMatrix.from_csv(text) if fmt == "csv" else TridiagonalMatrix.from_json(text)
    assert U.exact and U.epsilon == F(2, 3)
    assert list(U.sup) == [F(1, 3), F(1)] and list(U.diag) == [1, 2, 3]


def test_csv_header_fields():
    T = TridiagonalMatrix([1.0, 2.0], [0.5], [-0.5], Label.A, 1.0)
    text = T.to_csv()
    for key in ("order", "label", "epsilon"):
        assert f"# {key}:" in text
    assert "index,sub,diag,super" in text
