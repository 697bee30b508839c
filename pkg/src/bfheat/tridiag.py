"""Tridiagonal matrix container with banded solves and band-file I/O.

The band file formats are shared with the command line front end:

* CSV: three ``#``-prefixed header lines carrying ``order``, ``label`` and
  ``epsilon`` (plus optional extra metadata), then a header row
  ``index,sub,diag,super`` and one row per matrix row.  ``sub`` on row ``k``
  is the entry ``(k, k-1)`` and ``super`` is ``(k, k+1)``; missing entries
  are left empty.
* JSON: an object with keys ``order``, ``label``, ``epsilon``,
  ``first_index``, ``diag``, ``super``, ``sub``.
"""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np
from scipy.linalg import solve_banded

from .errors import DimensionMismatch, InvalidOrder, Singular


class Label(str, enum.Enum):
    A = "A"
    B = "B"
    C = "C"
    J = "J"
    M = "M"
    GALERKIN = "Galerkin"
    OTHER = "Other"


def _as_band(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.dtype == object:
        return arr.copy()
    if np.iscomplexobj(arr):
        return arr.astype(complex)
    return arr.astype(float)


@dataclass(frozen=True, eq=False)
class TridiagonalMatrix:
    """Square tridiagonal matrix stored as three bands.

    ``sup[k]`` is the entry ``(k, k+1)`` and ``sub[k]`` the entry ``(k+1, k)``
    (0-based storage).  ``first_index`` records the mode number of row 0 so
    that matrices over the two-sided range ``-N..N`` keep their labelling.
    Bands of ``dtype=object`` hold exact :class:`fractions.Fraction` entries.
    """

    diag: np.ndarray
    sup: np.ndarray
    sub: np.ndarray
    label: Label = Label.OTHER
    epsilon: Any = None
    first_index: int = 1
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        d, u, l = _as_band(self.diag), _as_band(self.sup), _as_band(self.sub)
        if d.ndim != 1 or d.size < 1:
            raise InvalidOrder(f"order must be >= 1, got diagonal of shape {d.shape}")
        if u.shape != (d.size - 1,) or l.shape != (d.size - 1,):
            raise DimensionMismatch(
                f"bands of lengths {u.size}/{l.size} do not fit order {d.size}"
            )
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "sup", u)
        object.__setattr__(self, "sub", l)
        object.__setattr__(self, "label", Label(self.label))

    @property
    def order(self) -> int:
        return self.diag.size

    @property
    def exact(self) -> bool:
        return self.diag.dtype == object

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.first_index, self.first_index + self.order)

    def is_diagonal(self) -> bool:
        return not (np.any(self.sup != 0) or np.any(self.sub != 0))

    def to_dense(self) -> np.ndarray:
        n = self.order
        if self.exact:
            out = np.full((n, n), Fraction(0), dtype=object)
        else:
            dtype = np.result_type(self.diag, self.sup, self.sub)
            out = np.zeros((n, n), dtype=dtype)
        idx = np.arange(n)
        out[idx, idx] = self.diag
        out[idx[:-1], idx[1:]] = self.sup
        out[idx[1:], idx[:-1]] = self.sub
        return out

    def transpose(self) -> "TridiagonalMatrix":
        return TridiagonalMatrix(
            self.diag, self.sub, self.sup, Label.OTHER, self.epsilon, self.first_index
        )

    @property
    def T(self) -> "TridiagonalMatrix":
        return self.transpose()

    def scaled(self, factor) -> "TridiagonalMatrix":
        return TridiagonalMatrix(
            factor * self.diag, factor * self.sup, factor * self.sub,
            Label.OTHER, self.epsilon, self.first_index,
        )

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """Product ``T @ x`` for a vector or a stack of column vectors."""
        x = np.asarray(x)
        if x.shape[0] != self.order:
            raise DimensionMismatch(f"vector length {x.shape[0]} != order {self.order}")
        d = self.diag.reshape((-1,) + (1,) * (x.ndim - 1))
        u = self.sup.reshape((-1,) + (1,) * (x.ndim - 1))
        l = self.sub.reshape((-1,) + (1,) * (x.ndim - 1))
        # off-diagonal terms are summed first so that the result is invariant
        # (bit for bit) under reversing the index order
        off = np.zeros_like(d * x)
        off[1:] = l * x[:-1]
        off[:-1] = off[:-1] + u * x[1:]
        return d * x + off

    def __matmul__(self, x):
        return self.matvec(x)

    def banded(self) -> np.ndarray:
        """LAPACK ``(1, 1)`` band storage used by :func:`scipy.linalg.solve_banded`."""
        dtype = np.result_type(self.diag, self.sup, self.sub)
        ab = np.zeros((3, self.order), dtype=dtype)
        ab[0, 1:] = self.sup
        ab[1] = self.diag
        ab[2, :-1] = self.sub
        return ab

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve ``T x = rhs`` with partial pivoting (LAPACK ``gbsv``)."""
        if self.exact:
            raise TypeError("exact matrices do not support floating-point solves")
        rhs = np.asarray(rhs)
        if rhs.shape[0] != self.order:
            raise DimensionMismatch(f"rhs length {rhs.shape[0]} != order {self.order}")
        if self.order == 1:
            if self.diag[0] == 0:
                raise Singular("1x1 matrix is zero")
            return rhs / self.diag[0]
        try:
            return solve_banded((1, 1), self.banded(), rhs)
        except np.linalg.LinAlgError as exc:
            raise Singular(str(exc)) from exc

    def max_abs(self) -> float:
        return float(
            max(np.max(np.abs(self.diag)),
                np.max(np.abs(self.sup), initial=0),
                np.max(np.abs(self.sub), initial=0))
        )

    # ------------------------------------------------------------------ I/O

    def _header(self) -> dict:
        eps = self.epsilon
        if isinstance(eps, Fraction):
            eps = str(eps)
        return {"order": self.order, "label": self.label.value, "epsilon": eps,
                "first_index": self.first_index, "exact": self.exact}

    def to_json(self, extra: dict | None = None) -> str:
        def enc(band):
            if self.exact:
                return [str(v) for v in band]
            if np.iscomplexobj(band):
                return [[float(v.real), float(v.imag)] for v in band]
            return [float(v) for v in band]

        doc = self._header()
        doc.update(diag=enc(self.diag), super=enc(self.sup), sub=enc(self.sub))
        if extra:
            doc.update(extra)
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "TridiagonalMatrix":
        doc = json.loads(text)

        def dec(band):
            if doc.get("exact") or (band and isinstance(band[0], str)):
                return np.array([Fraction(v) for v in band], dtype=object)
            if band and isinstance(band[0], list):
                return np.array([complex(*v) for v in band])
            return np.array(band, dtype=float)

        eps = doc.get("epsilon")
        if isinstance(eps, str):
            eps = Fraction(eps)
        return cls(dec(doc["diag"]), dec(doc["super"]), dec(doc["sub"]),
                   Label(doc["label"]), eps, int(doc.get("first_index", 1)))

    def to_csv(self, extra: dict | None = None) -> str:
        buf = io.StringIO()
        header = self._header()
        if extra:
            header.update(extra)
        for key, value in header.items():
            buf.write(f"# {key}: {json.dumps(value)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["index", "sub", "diag", "super"])
        n = self.order
        for k in range(n):
            sub = self.sub[k - 1] if k > 0 else ""
            sup = self.sup[k] if k < n - 1 else ""
            writer.writerow([self.first_index + k, _fmt(sub), _fmt(self.diag[k]), _fmt(sup)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "TridiagonalMatrix":
        meta = {}
        rows = []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                meta[key.strip()] = json.loads(value)
            elif line.strip():
                rows.append(line)
        body = list(csv.reader(rows))[1:]
        exact = bool(meta.get("exact", False))
        parse = Fraction if exact else _parse_number
        diag = [parse(r[2]) for r in body]
        sub = [parse(r[1]) for r in body[1:]]
        sup = [parse(r[3]) for r in body[:-1]]
        kind = object if exact else None
        eps = meta.get("epsilon")
        if isinstance(eps, str):
            eps = Fraction(eps)
        return cls(np.array(diag, dtype=kind), np.array(sup, dtype=kind),
                   np.array(sub, dtype=kind), Label(meta.get("label", "Other")), eps,
                   int(meta.get("first_index", body[0][0] if body else 1)))


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (complex, np.complexfloating)):
        return repr(complex(v)).strip("()")
    return repr(float(v))


def _parse_number(s: str):
    try:
        return float(s)
    except ValueError:
        return complex(s)
