"""Eigenvalues, singular values and Hilbert-Schmidt diagnostics for truncations.

The eigenvalue routine is a shifted QR iteration applied directly to the
tridiagonal matrix, which is already upper Hessenberg.  It uses Francis
double shifts in real arithmetic so that complex eigenvalues come out as exact
conjugate pairs and real eigenvalues have exactly zero imaginary part.
Deflation is scale-relative: ``|h[k, k-1]| <= tol * (|h[k-1, k-1]| + |h[k, k]|)``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import diags
from scipy.sparse.linalg import LinearOperator, eigsh, splu

from .errors import NoConvergence, Singular
from .fourier import build_A
from .tridiag import TridiagonalMatrix

__all__ = [
    "SpectrumResult",
    "ConvergenceTable",
    "hqr_eigenvalues",
    "eigenvalues",
    "smallest_singular_value",
    "hs_norm_inverse",
    "convergence_study",
    "match_spectra",
]

MACHINE_EPS = np.finfo(float).eps


def _sort_by_modulus(z: np.ndarray) -> np.ndarray:
    # ties (conjugate pairs) broken by real part, then imaginary part
    order = np.lexsort((z.imag, z.real, np.round(np.abs(z), 12)))
    return z[order]


def hqr_eigenvalues(H, tol: float = MACHINE_EPS, max_sweeps: int | None = None):
    """All eigenvalues of a real upper Hessenberg matrix.

    Parameters
    ----------
    H : (n, n) array_like
        Real upper Hessenberg matrix; it is copied, not modified.
    tol : float
        Relative deflation threshold.
    max_sweeps : int, optional
        Budget of double-shift QR sweeps, default ``30 * n``.

    Returns
    -------
    eigs : ndarray of complex, in deflation order
    sweeps : int
        Number of QR sweeps performed.

    Raises
    ------
    NoConvergence
        If the sweep budget is exhausted.
    """
    a = np.array(H, dtype=float, copy=True)
    n = a.shape[0]
    if max_sweeps is None:
        max_sweeps = 30 * max(n, 1)
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = float(np.sum(np.abs(np.triu(a, -1)))) or 1.0
    nn = n - 1
    shift_total = 0.0
    sweeps = 0
    its = 0
    while nn >= 0:
        # locate the last negligible subdiagonal entry in the active block
        l = 0
        for k in range(nn, 0, -1):
            s = abs(a[k - 1, k - 1]) + abs(a[k, k])
            if s == 0.0:
                s = anorm
            if abs(a[k, k - 1]) <= tol * s:
                a[k, k - 1] = 0.0
                l = k
                break
        x = a[nn, nn]
        if l == nn:
            wr[nn] = x + shift_total
            nn -= 1
            its = 0
            continue
        y = a[nn - 1, nn - 1]
        w = a[nn, nn - 1] * a[nn - 1, nn]
        if l == nn - 1:
            p = 0.5 * (y - x)
            q = p * p + w
            z = math.sqrt(abs(q))
            x += shift_total
            if q >= 0.0:
                z = p + math.copysign(z, p)
                wr[nn - 1] = wr[nn] = x + z
                if z != 0.0:
                    wr[nn] = x - w / z
            else:
                wr[nn - 1] = wr[nn] = x + p
                wi[nn - 1] = -z
                wi[nn] = z
            nn -= 2
            its = 0
            continue
        if sweeps >= max_sweeps:
            raise NoConvergence(sweeps, n - 1 - nn, nn + 1)
        if its > 0 and its % 10 == 0:
            # exceptional shift to break cycles
            shift_total += x
            idx = np.arange(nn + 1)
            a[idx, idx] -= x
            s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
            x = y = 0.75 * s
            w = -0.4375 * s * s
        its += 1
        sweeps += 1
        # look for two consecutive small subdiagonal entries
        m = nn - 2
        while True:
            z = a[m, m]
            r = x - z
            s = y - z
            p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
            q = a[m + 1, m + 1] - z - r - s
            r = a[m + 2, m + 1]
            s = abs(p) + abs(q) + abs(r)
            p /= s
            q /= s
            r /= s
            if m == l:
                break
            u = abs(a[m, m - 1]) * (abs(q) + abs(r))
            v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
            if u <= MACHINE_EPS * v:
                break
            m -= 1
        for i in range(m + 2, nn + 1):
            a[i, i - 2] = 0.0
            if i != m + 2:
                a[i, i - 3] = 0.0
        # double-shift QR sweep (bulge chase) on rows/columns l..nn
        for k in range(m, nn):
            if k != m:
                p = a[k, k - 1]
                q = a[k + 1, k - 1]
                r = a[k + 2, k - 1] if k != nn - 1 else 0.0
                x = abs(p) + abs(q) + abs(r)
                if x != 0.0:
                    p /= x
                    q /= x
                    r /= x
            s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
            if s == 0.0:
                continue
            if k == m:
                if l != m:
                    a[k, k - 1] = -a[k, k - 1]
            else:
                a[k, k - 1] = -s * x
            p += s
            x = p / s
            y = q / s
            z = r / s
            q /= p
            r /= p
            last = k != nn - 1
            # rows k..k+2, columns k..nn
            rows = a[k:k + (3 if last else 2), k:nn + 1]
            pr = rows[0] + q * rows[1]
            if last:
                pr = pr + r * rows[2]
                rows[2] -= pr * z
            rows[1] -= pr * y
            rows[0] -= pr * x
            # columns k..k+2, rows l..min(nn, k+3)
            top = min(nn, k + 3) + 1
            cols = a[l:top, k:k + (3 if last else 2)]
            pc = x * cols[:, 0] + y * cols[:, 1]
            if last:
                pc = pc + z * cols[:, 2]
                cols[:, 2] -= pc * r
            cols[:, 1] -= pc * q
            cols[:, 0] -= pc
    return wr + 1j * wi, sweeps


@dataclass
class SpectrumResult:
    """Eigenvalues of one truncation, sorted by modulus, with run metadata."""

    eigenvalues: np.ndarray
    order: int
    epsilon: float | None
    iterations: int
    max_residual: float | None = None
    transpose_discrepancy: float | None = None
    converged: np.ndarray | None = None

    def __len__(self):
        return len(self.eigenvalues)

    def smallest(self, k: int) -> np.ndarray:
        return self.eigenvalues[:k]

    def to_csv(self, config: dict | None = None) -> str:
        buf = io.StringIO()
        meta = dict(order=self.order, epsilon=self.epsilon, iterations=self.iterations,
                    max_residual=self.max_residual)
        if config:
            meta["config"] = config
        buf.write(f"# {json.dumps(meta)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "re", "im", "converged"])
        conv = self.converged if self.converged is not None else [""] * len(self)
        for i, (lam, c) in enumerate(zip(self.eigenvalues, conv), start=1):
            w.writerow([i, repr(float(lam.real)), repr(float(lam.imag)),
                        "" if c == "" else int(bool(c))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "epsilon": self.epsilon,
            "iterations": self.iterations,
            "max_residual": self.max_residual,
            "transpose_discrepancy": self.transpose_discrepancy,
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "converged": None if self.converged is None
            else [bool(c) for c in self.converged],
        }


def match_spectra(a, b) -> float:
    """Largest distance in an optimal one-to-one matching of two eigenvalue sets."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.size != b.size:
        raise ValueError("spectra of different sizes")
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    i, j = linear_sum_assignment(cost)
    return float(cost[i, j].max())


def _inverse_iteration(T: TridiagonalMatrix, lam: complex, steps: int = 3):
    n = T.order
    shifted = TridiagonalMatrix(T.diag.astype(complex) - lam, T.sup.astype(complex),
                                T.sub.astype(complex))
    # perturb an exact eigenvalue slightly so the shifted matrix is invertible
    bump = 1e3 * MACHINE_EPS * max(1.0, abs(lam))
    rng = np.random.default_rng(n)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    for _ in range(steps):
        try:
            v = shifted.solve(v)
        except Singular:
            shifted = TridiagonalMatrix(shifted.diag - bump, shifted.sup, shifted.sub)
            v = shifted.solve(v)
        nv = np.linalg.norm(v)
        if not np.isfinite(nv) or nv == 0:
            break
        v = v / nv
    return v


def eigenvalues(T: TridiagonalMatrix, tol: float = MACHINE_EPS,
                max_sweeps: int | None = None, *, vectors: bool = False,
                self_check: bool = False) -> SpectrumResult:
    """All eigenvalues of a real tridiagonal matrix by shifted QR.

    Parameters
    ----------
    T : TridiagonalMatrix
        Real tridiagonal matrix (treated as upper Hessenberg).
    tol : float
        Relative deflation threshold.
    max_sweeps : int, optional
        QR sweep budget; :class:`NoConvergence` is raised when exceeded.
    vectors : bool
        Compute eigenvectors by inverse iteration and record the largest
        residual ``||T v - lam v|| / (||T||_1 ||v||)``.
    self_check : bool
        Also solve for ``T^T`` and record the matching distance between the two
        spectra in ``transpose_discrepancy``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if np.iscomplexobj(T.diag) or np.iscomplexobj(T.sup) or np.iscomplexobj(T.sub):
        raise TypeError("eigenvalues() expects a real tridiagonal matrix")
    dense = T.to_dense().astype(float)
    lam, sweeps = hqr_eigenvalues(dense, tol, max_sweeps)
    lam = _sort_by_modulus(lam)
    eps = None if T.epsilon is None else float(T.epsilon)
    result = SpectrumResult(lam, T.order, eps, sweeps)
    if vectors:
        scale = max(np.sum(np.abs(dense), axis=0).max(), 1.0)
        worst = 0.0
        for z in lam:
            v = _inverse_iteration(T, z)
            r = np.linalg.norm(T.matvec(v.astype(complex)) - z * v) / scale
            worst = max(worst, float(r))
        result.max_residual = worst
    if self_check:
        lam_t, sweeps_t = hqr_eigenvalues(dense.T.copy(), tol, max_sweeps)
        result.transpose_discrepancy = match_spectra(lam, lam_t)
        result.iterations += sweeps_t
    return result


def smallest_singular_value(T: TridiagonalMatrix, method: str = "auto") -> float:
    """Smallest singular value of a tridiagonal matrix.

    ``method='iterative'`` runs Lanczos on ``(T^H T)^{-1}`` with one sparse LU
    factorization of ``T``; ``'dense'`` calls a full SVD; ``'auto'`` uses the
    dense path for orders below 3.

    Raises
    ------
    Singular
        If ``T`` is numerically singular.
    """
    n = T.order
    if T.is_diagonal():
        method = "diagonal"
    elif method == "auto":
        method = "dense" if n < 3 else "iterative"
    if method == "diagonal":
        smin = float(np.min(np.abs(T.diag.astype(complex))))
    elif method == "dense":
        s = np.linalg.svd(T.to_dense().astype(complex), compute_uv=False)
        smin = float(s[-1])
    elif method == "iterative":
        sp = diags([T.sub, T.diag, T.sup], [-1, 0, 1], format="csc")
        try:
            lu = splu(sp)
        except RuntimeError as exc:
            raise Singular(str(exc)) from exc
        dtype = sp.dtype

        def apply(x):
            y = lu.solve(np.asarray(x, dtype=dtype).ravel(), trans="H")
            return lu.solve(y)

        op = LinearOperator((n, n), matvec=apply, dtype=dtype)
        mu = eigsh(op, k=1, which="LM", tol=1e-12, return_eigenvectors=False,
                   v0=np.ones(n, dtype=dtype))[0]
        if not np.isfinite(mu) or mu <= 0:
            raise Singular(f"inverse Gram operator gave {mu}")
        smin = float(1.0 / math.sqrt(abs(mu)))
    else:
        raise ValueError(f"unknown method {method!r}")
    if smin <= n * MACHINE_EPS * T.max_abs():
        raise Singular(f"smallest singular value {smin:.3e} is at machine-zero level")
    return smin


def hs_norm_inverse(T: TridiagonalMatrix, block: int = 512) -> float:
    """Frobenius (Hilbert-Schmidt) norm of ``T^{-1}``.

    Solves ``T x = e_j`` for every unit vector, in blocks of ``block`` columns
    sharing one LU factorization; a diagonal ``T`` is handled in closed form.
    """
    n = T.order
    if T.is_diagonal():
        d = T.diag.astype(complex)
        if np.any(d == 0):
            raise Singular("zero on the diagonal")
        return float(np.sqrt(np.sum(1.0 / np.abs(d) ** 2)))
    sp = diags([T.sub, T.diag, T.sup], [-1, 0, 1], format="csc")
    try:
        lu = splu(sp)
    except RuntimeError as exc:
        raise Singular(str(exc)) from exc
    total = 0.0
    for start in range(0, n, block):
        stop = min(n, start + block)
        rhs = np.zeros((n, stop - start), dtype=sp.dtype)
        rhs[np.arange(start, stop), np.arange(stop - start)] = 1.0
        x = lu.solve(rhs)
        total += float(np.sum(np.abs(x) ** 2))
    if not np.isfinite(total):
        raise Singular("inverse has non-finite entries")
    return math.sqrt(total)


@dataclass
class ConvergenceTable:
    """First ``k`` eigenvalues (by modulus) per truncation order.

    ``differences[i]`` holds ``|lam_j(N_i) - lam_j(N_{i-1})|`` for ``i >= 1``
    (row 0 is NaN).  ``converged`` flags indices whose last difference is at
    most ``threshold``.
    """

    epsilon: float
    orders: list
    k: int
    values: np.ndarray
    differences: np.ndarray
    threshold: float
    iterations: list = field(default_factory=list)

    @property
    def converged(self) -> np.ndarray:
        if len(self.orders) < 2:
            return np.zeros(self.k, dtype=bool)
        return self.differences[-1] <= self.threshold

    @property
    def nonconverged_indices(self) -> list:
        return [int(i) + 1 for i in np.flatnonzero(~self.converged)]

    def max_imag_converged(self) -> float:
        conv = self.converged
        if not conv.any():
            return float("nan")
        return float(np.max(np.abs(self.values[-1][conv].imag)))

    def to_csv(self, config: dict | None = None) -> str:
        buf = io.StringIO()
        meta = dict(epsilon=self.epsilon, orders=self.orders, k=self.k,
                    threshold=self.threshold)
        if config:
            meta["config"] = config
        buf.write(f"# {json.dumps(meta)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "index", "re", "im", "diff_prev", "converged"])
        conv = self.converged
        for row, N in enumerate(self.orders):
            for j in range(self.k):
                lam = self.values[row, j]
                d = self.differences[row, j]
                flag = int(conv[j]) if row == len(self.orders) - 1 else ""
                w.writerow([N, j + 1, repr(float(lam.real)), repr(float(lam.imag)),
                            "" if np.isnan(d) else repr(float(d)), flag])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "orders": list(self.orders),
            "k": self.k,
            "threshold": self.threshold,
            "values": [[[float(z.real), float(z.imag)] for z in row] for row in self.values],
            "differences": [[None if np.isnan(d) else float(d) for d in row]
                            for row in self.differences],
            "converged": [bool(c) for c in self.converged],
        }


def convergence_study(eps, N_list, k: int, *, threshold: float = 1e-6,
                      tol: float = MACHINE_EPS, allow_out_of_range: bool = False
                      ) -> ConvergenceTable:
    """Track the ``k`` smallest-modulus eigenvalues of ``A_N`` over ``N_list``.

    An index counts as converged when its change between the last two orders
    is at most ``threshold``.  Eigenvalues are paired across orders by an
    optimal assignment so that reordering of near-equal moduli does not show
    up as a spurious difference.
    """
    orders = [int(N) for N in N_list]
    if any(b <= a for a, b in zip(orders, orders[1:])):
        raise ValueError("N_list must be strictly increasing")
    if not orders or k > orders[0] or k < 1:
        raise ValueError("need 1 <= k <= min(N_list)")
    values = np.zeros((len(orders), k), dtype=complex)
    diffs = np.full((len(orders), k), np.nan)
    iterations = []
    for row, N in enumerate(orders):
        res = eigenvalues(build_A(N, eps, allow_out_of_range=allow_out_of_range), tol)
        iterations.append(res.iterations)
        cur = res.eigenvalues[:k]
        if row > 0:
            prev = values[row - 1]
            cost = np.abs(prev[:, None] - cur[None, :])
            i, j = linear_sum_assignment(cost)
            perm = np.empty(k, dtype=int)
            perm[i] = j
            cur = cur[perm]
            diffs[row] = np.abs(cur - prev)
        values[row] = cur
    return ConvergenceTable(float(eps), orders, k, values, diffs, threshold, iterations)
