"""Galerkin truncation of ``y_t + L y = 0`` in the exponential basis.

The matrix of L on ``span{e^{inx} : |n| <= N}`` splits into three invariant
sectors: the zero mode (annihilated), the positive modes, where it equals
``i A_N^T``, and the negative modes, where it equals ``-i A_N^T`` after the
reflection ``n -> -n``.  Propagation is done sector by sector, so the mean is
conserved exactly and real data stay real (the negative-sector propagator is
the complex conjugate of the positive one).
"""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import EigendecompositionIllConditioned
from .expm import expm_pade, expm_pade_lognorm
from .fourier import build_A, validate_epsilon
from .tridiag import Label, TridiagonalMatrix
from .trigpoly import TrigPoly

__all__ = [
    "GalerkinMatrix",
    "galerkin_matrix",
    "Propagator",
    "propagator",
    "propagate",
    "transient_growth",
    "EvolutionTrace",
    "evolve",
]

EIGEN_COND_LIMIT = 1e8


@dataclass(frozen=True)
class GalerkinMatrix:
    """Matrix of L over modes ``-N..N`` with its sector structure."""

    N: int
    eps: float
    matrix: TridiagonalMatrix

    @property
    def sector_map(self) -> dict:
        N = self.N
        return {"negative": np.arange(-N, 0), "zero": np.array([0]),
                "positive": np.arange(1, N + 1)}

    def dense(self) -> np.ndarray:
        return self.matrix.to_dense()

    def positive_block(self) -> np.ndarray:
        N = self.N
        return self.dense()[N + 1:, N + 1:]

    def negative_block(self) -> np.ndarray:
        """Negative-mode block reindexed by ``m = -n = 1..N``."""
        N = self.N
        return self.dense()[:N, :N][::-1, ::-1]

    def off_sector_residual(self) -> float:
        """Largest entry coupling two different sectors (zero by construction)."""
        G = self.dense().copy()
        N = self.N
        G[:N, :N] = 0
        G[N, N] = 0
        G[N + 1:, N + 1:] = 0
        return float(np.max(np.abs(G)))


def galerkin_matrix(N: int, eps: float, *, allow_out_of_range: bool = False) -> GalerkinMatrix:
    """Exponential-basis matrix of ``L``: column ``n`` holds ``i n`` on the
    diagonal, ``i eps n(n+1)/2`` in row ``n+1`` and ``-i eps n(n-1)/2`` in
    row ``n-1``."""
    validate_epsilon(eps, allow_out_of_range)
    e = float(eps)
    m = np.arange(-N, N + 1, dtype=float)
    diag = 1j * m
    # real factors are formed exactly as in build_A, so the sector blocks
    # reproduce +-i A_N^T bit for bit
    sub = 1j * (e * (m[:-1] * (m[:-1] + 1)) / 2)
    sup = -1j * (e * (m[1:] * (m[1:] - 1)) / 2)
    T = TridiagonalMatrix(diag, sup, sub, Label.GALERKIN, e, first_index=-N)
    return GalerkinMatrix(int(N), e, T)


@dataclass
class Propagator:
    """``exp(-t i A_N^T)``, the positive-sector block of ``exp(-t L_N)``."""

    t: float
    N: int
    eps: float
    matrix: np.ndarray
    method: str
    fallback: bool = False
    eigvec_cond: float | None = None


def propagator(t: float, N: int, eps: float, method: str = "eigen", *,
               allow_out_of_range: bool = False) -> Propagator:
    """Positive-sector propagator at time ``t``.

    ``method='eigen'`` diagonalizes ``i A_N^T`` and falls back to
    ``'scaling_squaring'`` (with a warning and ``fallback=True``) when the
    eigenvector matrix has condition number above ``1e8`` or the result is
    not finite.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if method not in ("eigen", "scaling_squaring"):
        raise ValueError(f"unknown method {method!r}")
    validate_epsilon(eps, allow_out_of_range)
    P = 1j * build_A(N, eps, allow_out_of_range=allow_out_of_range).to_dense().T
    if t == 0:
        return Propagator(0.0, N, float(eps), np.eye(N, dtype=complex), method)
    if method == "eigen":
        lam, V = np.linalg.eig(P)
        cond = float(np.linalg.cond(V))
        if np.isfinite(cond) and cond < EIGEN_COND_LIMIT:
            with np.errstate(over="ignore", invalid="ignore"):
                E = (V * np.exp(-t * lam)) @ np.linalg.inv(V)
            if np.all(np.isfinite(E)):
                return Propagator(float(t), N, float(eps), E, "eigen", False, cond)
            reason = "eigen route overflowed"
        else:
            reason = f"eigenvector condition number {cond:.2e} >= {EIGEN_COND_LIMIT:.0e}"
        warnings.warn(EigendecompositionIllConditioned(
            f"{reason}; using scaling and squaring"), stacklevel=2)
        return Propagator(float(t), N, float(eps), expm_pade(-t * P),
                          "scaling_squaring", True, cond)
    return Propagator(float(t), N, float(eps), expm_pade(-t * P), "scaling_squaring")


def _apply(prop: Propagator, y0: TrigPoly) -> TrigPoly:
    N = prop.N
    c = y0.padded(N).coeffs
    out = np.empty_like(c)
    out[N] = c[N]
    out[N + 1:] = prop.matrix @ c[N + 1:]
    out[:N] = (np.conj(prop.matrix) @ c[:N][::-1])[::-1]
    return TrigPoly(out)


def propagate(y0: TrigPoly, t: float, N: int, eps: float, method: str = "eigen", *,
              return_info: bool = False, allow_out_of_range: bool = False):
    """``exp(-t L_N) y0`` for a trigonometric polynomial of degree ``<= N``."""
    if y0.degree > N:
        raise ValueError(f"initial data of degree {y0.degree} exceeds N={N}")
    prop = propagator(t, N, eps, method, allow_out_of_range=allow_out_of_range)
    y = _apply(prop, y0)
    return (y, prop) if return_info else y


def transient_growth(t: float, N: int, eps: float, *, log: bool = False,
                     allow_out_of_range: bool = False) -> float:
    """``||exp(-t L_N)||_2`` on zero-mean data (largest singular value).

    The two nonzero sectors are complex conjugates, so one block suffices.
    The truncated flow can amplify beyond the float range for moderate
    ``N``; ``log=True`` returns the natural logarithm, computed without
    overflow.  Otherwise the value may be ``inf``.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    validate_epsilon(eps, allow_out_of_range)
    if t == 0:
        return 0.0 if log else 1.0
    P = 1j * build_A(N, eps, allow_out_of_range=allow_out_of_range).to_dense().T
    _, logscale = expm_pade_lognorm(-t * P)
    if log:
        return logscale
    with np.errstate(over="ignore"):
        return float(np.exp(logscale))


@dataclass
class EvolutionTrace:
    times: np.ndarray
    states: list
    norms: np.ndarray
    growth: np.ndarray
    config: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# {json.dumps(self.config)}\n")
        N = self.states[0].degree
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"abs_c{n}" for n in range(-N, N + 1)] + ["norm", "growth"])
        for t, y, nrm, g in zip(self.times, self.states, self.norms, self.growth):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in np.abs(y.coeffs)]
                       + [repr(float(nrm)), repr(float(g))])
        return buf.getvalue()


def evolve(y0: TrigPoly, times, N: int, eps: float, method: str = "eigen",
           **kw) -> EvolutionTrace:
    """Evaluate the truncated flow at each of ``times`` (must start at 0)."""
    times = np.asarray(times, dtype=float)
    if times.size == 0 or times[0] != 0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be increasing and start at 0")
    states, norms, growth = [], [], []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EigendecompositionIllConditioned)
        for t in times:
            prop = propagator(t, N, eps, method, **kw)
            y = _apply(prop, y0)
            states.append(y)
            norms.append(y.norm())
            growth.append(1.0 if t == 0 else float(np.linalg.norm(prop.matrix, 2)))
    return EvolutionTrace(times, states, np.array(norms), np.array(growth),
                          dict(N=N, eps=float(eps), method=method))
