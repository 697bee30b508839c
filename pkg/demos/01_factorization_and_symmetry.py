"""
Fourier matrix, its factorization and the reflection symmetry
=============================================================

The operator ``L y = eps*(sin x y')' + y'`` acts on Fourier coefficients
through a tridiagonal matrix ``A``.  It factors as ``A = B C`` with ``C``
diagonal, and it is self-adjoint with respect to the indefinite form given
by the reflection ``x -> pi - x``.
"""

from fractions import Fraction

import numpy as np

from bfheat import (
    TrigPoly,
    apply_J,
    apply_L,
    apply_L_star,
    build_A,
    build_B,
    build_C,
    check_factorization,
    check_J_selfadjoint,
    check_LMS,
    random_trigpoly,
)

eps = 0.5
A = build_A(6, eps)
print("A_6 at eps = 0.5:")
print(np.round(A.to_dense(), 3))

# A = B C holds exactly in rational arithmetic and to rounding in floats
B, C = build_B(6, eps), build_C(6)
print("\nmax |A - B C|           :", np.max(np.abs(A.to_dense() - B.to_dense() @ C.to_dense())))
print("exact residual, N = 50  :", check_factorization(50, Fraction(1, 2), exact=True))

# J A^T J = A in the coefficient picture
print("max |J A^T J - A|, N=500:", check_J_selfadjoint(500, eps))

# the same symmetry on functions: J L* J = L, and L = M S
rng = np.random.default_rng(0)
y = random_trigpoly(8, rng)
print("|J L* J y - L y|        :", (apply_J(apply_L_star(apply_J(y), eps)) - apply_L(y, eps)).norm())
print("|L y - M(y')|           :", check_LMS(y, eps))

# L maps cos x to the mean-free polynomial below
print("\nL(cos x) coefficients (modes -2..2):")
print(apply_L(TrigPoly.cos(1), eps).coeffs)
