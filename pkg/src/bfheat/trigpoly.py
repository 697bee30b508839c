"""Trigonometric polynomials ``sum_{|n|<=N} c_n e^{inx}`` on (-pi, pi).

Norms and inner products use the unnormalized L^2 product
``<f, g> = int_{-pi}^{pi} f conj(g) dx``, so ``||e^{inx}||^2 = 2 pi``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

__all__ = ["TrigPoly", "random_trigpoly"]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class TrigPoly:
    """Immutable coefficient vector ``c[-N..N]`` stored at offset ``N``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.size % 2 != 1:
            raise ValueError("coefficient vector must have odd length 2N+1")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # -------------------------------------------------------------- creation

    @classmethod
    def zeros(cls, degree: int) -> "TrigPoly":
        return cls(np.zeros(2 * degree + 1))

    @classmethod
    def from_modes(cls, modes: dict) -> "TrigPoly":
        """Build from ``{n: c_n}``."""
        N = max((abs(int(n)) for n in modes), default=0)
        c = np.zeros(2 * N + 1, dtype=complex)
        for n, v in modes.items():
            c[int(n) + N] += v
        return cls(c)

    @classmethod
    def constant(cls, value=1.0) -> "TrigPoly":
        return cls([value])

    @classmethod
    def exp(cls, k: int) -> "TrigPoly":
        return cls.from_modes({k: 1.0})

    @classmethod
    def cos(cls, k: int = 1) -> "TrigPoly":
        return cls.from_modes({k: 0.5, -k: 0.5}) if k else cls.constant()

    @classmethod
    def sin(cls, k: int = 1) -> "TrigPoly":
        return cls.from_modes({k: -0.5j, -k: 0.5j}) if k else cls.zeros(0)

    # ------------------------------------------------------------ structure

    @property
    def degree(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def modes(self) -> np.ndarray:
        N = self.degree
        return np.arange(-N, N + 1)

    def __getitem__(self, n: int) -> complex:
        N = self.degree
        return complex(self.coeffs[n + N]) if abs(n) <= N else 0j

    def padded(self, degree: int) -> "TrigPoly":
        N = self.degree
        if degree < N:
            raise ValueError("cannot pad to a smaller degree")
        c = np.zeros(2 * degree + 1, dtype=complex)
        c[degree - N:degree + N + 1] = self.coeffs
        return TrigPoly(c)

    def trimmed(self, tol: float = 0.0) -> "TrigPoly":
        c = self.coeffs
        N = self.degree
        while N > 0 and abs(c[0]) <= tol and abs(c[-1]) <= tol:
            c = c[1:-1]
            N -= 1
        return TrigPoly(c)

    @property
    def mean(self) -> complex:
        """Average over one period, i.e. the mode-0 coefficient."""
        return self[0]

    def is_real(self, tol: float = 0.0) -> bool:
        c = self.coeffs
        return bool(np.max(np.abs(c - np.conj(c[::-1]))) <= tol)

    # ----------------------------------------------------------- arithmetic

    def _aligned(self, other: "TrigPoly"):
        N = max(self.degree, other.degree)
        return self.padded(N).coeffs, other.padded(N).coeffs

    def __add__(self, other):
        if np.isscalar(other):
            other = TrigPoly.constant(other)
        a, b = self._aligned(other)
        return TrigPoly(a + b)

    __radd__ = __add__

    def __sub__(self, other):
        if np.isscalar(other):
            other = TrigPoly.constant(other)
        a, b = self._aligned(other)
        return TrigPoly(a - b)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return TrigPoly(-self.coeffs)

    def __mul__(self, other):
        if isinstance(other, TrigPoly):
            return TrigPoly(np.convolve(self.coeffs, other.coeffs))
        return TrigPoly(self.coeffs * other)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return TrigPoly(self.coeffs / scalar)

    def conj(self) -> "TrigPoly":
        """Complex conjugate function: ``c_n -> conj(c_{-n})``."""
        return TrigPoly(np.conj(self.coeffs[::-1]))

    def derivative(self) -> "TrigPoly":
        return TrigPoly(1j * self.modes * self.coeffs)

    def mul_sin(self) -> "TrigPoly":
        """Multiply by ``sin x = (e^{ix} - e^{-ix}) / 2i``; degree grows by one."""
        c = np.zeros(self.coeffs.size + 2, dtype=complex)
        c[2:] += self.coeffs / 2j
        c[:-2] -= self.coeffs / 2j
        return TrigPoly(c)

    def mul_cos(self) -> "TrigPoly":
        c = np.zeros(self.coeffs.size + 2, dtype=complex)
        c[2:] += self.coeffs / 2
        c[:-2] += self.coeffs / 2
        return TrigPoly(c)

    def reflect(self) -> "TrigPoly":
        """``f(x) -> f(pi - x)``: coefficient ``m`` becomes ``(-1)^m c_{-m}``."""
        signs = np.where(self.modes % 2 == 0, 1.0, -1.0)
        return TrigPoly(signs * self.coeffs[::-1])

    # ---------------------------------------------------------- evaluation

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.empty(flat.shape, dtype=complex)
        chunk = 8192
        for s in range(0, flat.size, chunk):
            out[s:s + chunk] = np.exp(1j * np.outer(flat[s:s + chunk], self.modes)) @ self.coeffs
        return out.reshape(x.shape)

    def integrate(self, a: float, b: float) -> complex:
        """Exact ``int_a^b f(x) dx`` from the coefficients."""
        n = self.modes
        nz = n != 0
        total = self[0] * (b - a)
        total += np.sum(self.coeffs[nz] * (np.exp(1j * n[nz] * b) - np.exp(1j * n[nz] * a))
                        / (1j * n[nz]))
        return complex(total)

    def inner(self, other: "TrigPoly") -> complex:
        a, b = self._aligned(other)
        return complex(TWO_PI * np.sum(a * np.conj(b)))

    def norm(self) -> float:
        return float(np.sqrt(TWO_PI * np.sum(np.abs(self.coeffs) ** 2)))

    def max_abs_diff(self, other: "TrigPoly") -> float:
        a, b = self._aligned(other)
        return float(np.max(np.abs(a - b)))

    # ------------------------------------------------------------------ I/O

    def to_csv(self, meta: dict | None = None) -> str:
        buf = io.StringIO()
        if meta:
            buf.write(f"# {json.dumps(meta)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "re", "im"])
        for n, c in zip(self.modes, self.coeffs):
            w.writerow([int(n), repr(float(c.real)), repr(float(c.imag))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "TrigPoly":
        rows = [r for r in text.splitlines() if r.strip() and not r.startswith("#")]
        body = list(csv.reader(rows))
        if body and body[0][0].strip() == "n":
            body = body[1:]
        return cls.from_modes({int(r[0]): complex(float(r[1]), float(r[2])) for r in body})

    def __repr__(self):
        return f"TrigPoly(degree={self.degree}, coeffs={np.array2string(self.coeffs, precision=4)})"


def random_trigpoly(degree: int, rng: np.random.Generator | None = None, *,
                    real: bool = True, zero_mean: bool = True) -> TrigPoly:
    """Random polynomial with coefficients uniform on the complex unit disk.

    Modes ``1 <= |n| <= degree`` are drawn independently; ``real=True``
    enforces ``c_{-n} = conj(c_n)`` and ``zero_mean=True`` zeroes ``c_0``.
    """
    rng = np.random.default_rng() if rng is None else rng

    def disk(k):
        r = np.sqrt(rng.uniform(size=k))
        return r * np.exp(2j * np.pi * rng.uniform(size=k))

    c = np.zeros(2 * degree + 1, dtype=complex)
    pos = disk(degree)
    c[degree + 1:] = pos
    c[:degree] = np.conj(pos[::-1]) if real else disk(degree)
    if not zero_mean:
        c[degree] = rng.uniform(-1, 1) if real else disk(1)[0]
    return TrigPoly(c)
