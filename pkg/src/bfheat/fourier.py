"""Fourier-space truncations of the operator and its factors.

In the positive exponential modes ``e^{inx}``, ``n = 1..N`` the operator is the
tridiagonal matrix ``A`` with ``A[n, n] = n`` and off-diagonal entries
``+-eps*n*(n+1)/2``.  It factors as ``A = B C`` with ``C = diag(1..N)`` and a
bounded ``B`` with unit diagonal; it is ``J``-self-adjoint for
``J = diag(-1, 1, -1, ...)``.  Both identities hold exactly for every
principal truncation, so they are checked here both in floating point and in
exact rational arithmetic.

Row and column indices of ``A``, ``B``, ``C``, ``J`` start at 1; the matrix of
``M y = eps*(sin x y)' + y`` lives on the two-sided mode range ``-N..N``.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Real

import numpy as np

from .errors import DimensionMismatch, InvalidEpsilon, InvalidOrder
from .tridiag import Label, TridiagonalMatrix

__all__ = [
    "validate_epsilon",
    "build_A",
    "build_B",
    "build_C",
    "build_J",
    "build_M_matrix",
    "check_factorization",
    "check_J_selfadjoint",
    "sequence_norm",
]


def validate_epsilon(eps, allow_out_of_range: bool = False):
    """Return ``eps`` unchanged if it lies in the open interval (0, 2).

    Raises :class:`InvalidEpsilon` otherwise, unless ``allow_out_of_range``.
    """
    if not isinstance(eps, Real) or not np.isfinite(float(eps)):
        raise InvalidEpsilon(eps)
    if not allow_out_of_range and not (0 < eps < 2):
        raise InvalidEpsilon(eps)
    return eps


def _check_order(N):
    if int(N) != N or N < 1:
        raise InvalidOrder(f"truncation order must be a positive integer, got {N!r}")
    return int(N)


def _exact_eps(eps) -> Fraction:
    if isinstance(eps, (Fraction, int)):
        return Fraction(eps)
    return Fraction(str(eps))


def _modes(N, exact):
    if exact:
        return np.array([Fraction(n) for n in range(1, N + 1)], dtype=object)
    return np.arange(1, N + 1, dtype=float)


def build_A(N: int, eps, *, exact: bool = False,
            allow_out_of_range: bool = False) -> TridiagonalMatrix:
    """Truncation of ``A`` to modes ``1..N``.

    ``A[n, n] = n``, ``A[n, n+1] = eps*n*(n+1)/2``, ``A[n+1, n] = -eps*n*(n+1)/2``.
    With ``exact=True`` the bands hold :class:`~fractions.Fraction` values.
    """
    N = _check_order(N)
    validate_epsilon(eps, allow_out_of_range)
    e = _exact_eps(eps) if exact else float(eps)
    n = _modes(N, exact)
    tri = e * (n[:-1] * (n[:-1] + 1)) / 2
    return TridiagonalMatrix(n, tri, -tri, Label.A, e)


def build_B(N: int, eps, *, exact: bool = False,
            allow_out_of_range: bool = False) -> TridiagonalMatrix:
    """Bounded factor ``B`` of ``A = B C``: unit diagonal,
    ``B[n, n+1] = eps*n/2``, ``B[n+1, n] = -eps*(n+1)/2``."""
    N = _check_order(N)
    validate_epsilon(eps, allow_out_of_range)
    e = _exact_eps(eps) if exact else float(eps)
    n = _modes(N, exact)
    one = Fraction(1) if exact else 1.0
    diag = np.array([one] * N, dtype=object) if exact else np.ones(N)
    return TridiagonalMatrix(diag, e * n[:-1] / 2, -e * (n[:-1] + one) / 2, Label.B, e)


def build_C(N: int, *, exact: bool = False) -> TridiagonalMatrix:
    """``C = diag(1, 2, ..., N)``; its inverse is Hilbert-Schmidt."""
    N = _check_order(N)
    n = _modes(N, exact)
    zero = np.array([Fraction(0)] * (N - 1), dtype=object) if exact else np.zeros(N - 1)
    return TridiagonalMatrix(n, zero, zero.copy(), Label.C)


def build_J(N: int, *, exact: bool = False) -> TridiagonalMatrix:
    """Krein metric ``J = diag(-1, +1, -1, ...)`` on modes ``1..N``."""
    N = _check_order(N)
    signs = np.where(np.arange(1, N + 1) % 2 == 1, -1.0, 1.0)
    if exact:
        signs = np.array([Fraction(int(s)) for s in signs], dtype=object)
        zero = np.array([Fraction(0)] * (N - 1), dtype=object)
    else:
        zero = np.zeros(N - 1)
    return TridiagonalMatrix(signs, zero, zero.copy(), Label.J)


def build_M_matrix(N: int, eps, *, allow_out_of_range: bool = False) -> TridiagonalMatrix:
    """Matrix of ``M y = eps*(sin x y)' + y`` on ``span{e^{inx} : |n| <= N}``.

    Uses ``(sin x e^{inx})' = ((n+1) e^{i(n+1)x} - (n-1) e^{i(n-1)x}) / 2``:
    column ``n`` has 1 on the diagonal, ``eps*(n+1)/2`` in row ``n+1`` and
    ``-eps*(n-1)/2`` in row ``n-1``.  Row 0 receives nothing from columns
    ``+-1``, which is the discrete form of ``mean(M y) = mean(y)``.
    """
    N = _check_order(N)
    validate_epsilon(eps, allow_out_of_range)
    e = float(eps)
    m = np.arange(-N, N + 1, dtype=float)
    sub = e * (m[:-1] + 1) / 2
    sup = -e * m[:-1] / 2
    return TridiagonalMatrix(np.ones(2 * N + 1), sup, sub, Label.M, e, first_index=-N)


def times_diagonal(T: TridiagonalMatrix, D: TridiagonalMatrix) -> TridiagonalMatrix:
    """``T @ D`` for a diagonal ``D`` (stays tridiagonal, no truncation error)."""
    if T.order != D.order:
        raise DimensionMismatch(f"orders {T.order} and {D.order} differ")
    if not D.is_diagonal():
        raise DimensionMismatch("right factor must be diagonal")
    d = D.diag
    return TridiagonalMatrix(T.diag * d, T.sup * d[1:], T.sub * d[:-1],
                             Label.OTHER, T.epsilon, T.first_index)


def _band_residual(X: TridiagonalMatrix, Y: TridiagonalMatrix):
    parts = [np.abs(X.diag - Y.diag), np.abs(X.sup - Y.sup), np.abs(X.sub - Y.sub)]
    if X.exact and Y.exact:
        return max((max(p, default=Fraction(0)) for p in parts), default=Fraction(0))
    return float(max(np.max(p, initial=0.0) for p in parts))


def check_factorization(N: int, eps, *, exact: bool = False, relative: bool = False,
                        A: TridiagonalMatrix | None = None,
                        B: TridiagonalMatrix | None = None,
                        C: TridiagonalMatrix | None = None,
                        allow_out_of_range: bool = False):
    """Max-abs entrywise residual of ``A - B C``.

    The matrices default to fresh truncations at ``(N, eps)``; explicit ones
    can be passed (the command line uses this to inject a fault).  In exact
    mode the result is a :class:`~fractions.Fraction` and is identically 0.
    With ``relative=True`` the residual is divided by the largest entry of A.
    """
    kw = dict(exact=exact, allow_out_of_range=allow_out_of_range)
    A = build_A(N, eps, **kw) if A is None else A
    B = build_B(N, eps, **kw) if B is None else B
    C = build_C(N, exact=exact) if C is None else C
    if not (A.order == B.order == C.order):
        raise DimensionMismatch(f"orders {A.order}, {B.order}, {C.order} differ")
    if C.is_diagonal():
        res = _band_residual(A, times_diagonal(B, C))
    else:
        prod = B.to_dense() @ C.to_dense()
        res = np.max(np.abs(A.to_dense() - prod))
        res = res if (A.exact and B.exact) else float(res)
    if relative:
        scale = max(np.max(np.abs(A.diag)), np.max(np.abs(A.sup), initial=0))
        res = res / scale
    return res


def check_J_selfadjoint(N: int, eps, *, A: TridiagonalMatrix | None = None,
                        exact: bool = False, allow_out_of_range: bool = False):
    """Max-abs residual of ``J A^T J - A``; zero for every truncation."""
    A = build_A(N, eps, exact=exact, allow_out_of_range=allow_out_of_range) if A is None else A
    J = build_J(A.order, exact=A.exact)
    s = J.diag
    At = A.transpose()
    JAtJ = TridiagonalMatrix(s * At.diag * s, s[:-1] * At.sup * s[1:],
                             s[1:] * At.sub * s[:-1], Label.OTHER, A.epsilon)
    return _band_residual(JAtJ, A)


def sequence_norm(f) -> float:
    """Domain norm of a coefficient sequence ``f_1..f_N``.

    ``sqrt(sum_n n^2 (|f_n|^2 + |(n+1) f_{n+1} - (n-1) f_{n-1}|^2))`` with
    ``f_0 = 0``; the sum stops at ``n = N`` and ``f_{N+1}`` is taken as 0.
    """
    f = np.asarray(getattr(f, "coeffs", f), dtype=complex).ravel()
    if not np.all(np.isfinite(f)):
        raise ValueError("sequence has non-finite entries")
    N = f.size
    if N == 0:
        return 0.0
    n = np.arange(1, N + 1, dtype=float)
    padded = np.concatenate(([0.0], f, [0.0]))
    nxt = (n + 1) * padded[2:]
    prv = (n - 1) * padded[:-2]
    total = np.sum(n**2 * (np.abs(f) ** 2 + np.abs(nxt - prv) ** 2))
    return float(np.sqrt(total))
