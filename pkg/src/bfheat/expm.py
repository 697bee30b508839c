"""Matrix exponential by scaling and squaring with diagonal Pade approximants.

Degree selection and the 1-norm thresholds follow Higham (2005), "The scaling
and squaring method for the matrix exponential revisited".
"""

import numpy as np

__all__ = ["expm_pade", "expm_pade_lognorm"]

_THETA = {3: 1.495585217958292e-2, 5: 2.539398330063230e-1,
          7: 9.504178996162932e-1, 9: 2.097847961257068e0, 13: 5.371920351148152e0}

_COEFFS = {
    3: [120., 60., 12., 1.],
    5: [30240., 15120., 3360., 420., 30., 1.],
    7: [17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.],
    9: [17643225600., 8821612800., 2075673600., 302702400., 30270240.,
        2162160., 110880., 3960., 90., 1.],
    13: [64764752532480000., 32382376266240000., 7771770303897600.,
         1187353796428800., 129060195264000., 10559470521600., 670442572800.,
         33522128640., 1323241920., 40840800., 960960., 16380., 182., 1.],
}


def _pade_uv(A, m):
    b = _COEFFS[m]
    ident = np.eye(A.shape[0], dtype=A.dtype)
    A2 = A @ A
    if m == 13:
        A4 = A2 @ A2
        A6 = A4 @ A2
        U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
                 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
        V = A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 \
            + b[2] * A2 + b[0] * ident
        return U, V
    powers = [ident, A2]
    for _ in range(2, (m + 1) // 2):
        powers.append(powers[-1] @ A2)
    U = sum(b[j] * powers[j // 2] for j in range(m, 0, -2))
    V = sum(b[j] * powers[j // 2] for j in range(m - 1, -1, -2))
    return A @ U, V


def _prepare(A):
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    return A.astype(complex if np.iscomplexobj(A) else float)


def _scaled_pade(A):
    """Return ``(R, s)`` with ``R ~ exp(A / 2**s)``."""
    norm1 = np.linalg.norm(A, 1)
    for m in (3, 5, 7, 9):
        if norm1 <= _THETA[m]:
            U, V = _pade_uv(A, m)
            return np.linalg.solve(V - U, V + U), 0
    s = max(0, int(np.ceil(np.log2(norm1 / _THETA[13]))))
    U, V = _pade_uv(A / 2.0**s, 13)
    return np.linalg.solve(V - U, V + U), s


def expm_pade(A) -> np.ndarray:
    """``exp(A)`` for a square real or complex matrix."""
    A = _prepare(A)
    if A.shape[0] == 0:
        return A.copy()
    R, s = _scaled_pade(A)
    for _ in range(s):
        R = R @ R
    return R


def expm_pade_lognorm(A) -> tuple[np.ndarray, float]:
    """``exp(A) = exp(logscale) * Q`` with ``||Q||_2 = 1``.

    The squaring phase renormalizes after every step, so the result stays
    representable even when ``||exp(A)||`` is far outside the float range.
    """
    A = _prepare(A)
    R, s = _scaled_pade(A)
    c = np.linalg.norm(R, 2)
    Q, logscale = R / c, np.log(c)
    for _ in range(s):
        Q = Q @ Q
        c = np.linalg.norm(Q, 2)
        Q, logscale = Q / c, 2.0 * logscale + np.log(c)
    return Q, float(logscale)
