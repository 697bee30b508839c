"""
Eigenvalues of truncated Fourier matrices
=========================================

``A_N`` is real and tridiagonal but not symmetric.  Its smallest eigenvalue
settles quickly as ``N`` grows, while the rest of the spectrum of each
truncation contains complex-conjugate pairs whose imaginary parts grow with
``N``.  This script shows both effects.
"""

import numpy as np

from bfheat import build_A, build_B, convergence_study, eigenvalues, smallest_singular_value

eps = 0.5

for N in (3, 8, 32, 128):
    lam = eigenvalues(build_A(N, eps)).eigenvalues
    print(f"N = {N:4d}: smallest {lam[0].real:.8f}, "
          f"max |Im| {np.max(np.abs(lam.imag)):8.2f}, "
          f"real eigenvalues {int(np.sum(lam.imag == 0))}/{N}")

table = convergence_study(eps, [64, 128, 256], k=5)
print("\nfirst five eigenvalues for N = 64, 128, 256:")
for N, row in zip(table.orders, table.values):
    print(N, np.round(row, 6))
for N, d in zip(table.orders[1:], table.differences[1:]):
    print(f"largest change at N = {N}: {np.max(np.abs(d)):.3e}")

# the factor B stays well conditioned: its smallest singular value is at least 1 - eps/2
for N in (64, 256):
    print(f"sigma_min(B_{N}) = {smallest_singular_value(build_B(N, eps)):.6f}")
