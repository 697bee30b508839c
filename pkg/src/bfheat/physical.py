"""Exact action of L, L*, S, M and the reflection J on trigonometric polynomials.

``L y = eps*(sin x y')' + y'`` acts on ``e^{inx}`` by

    L e^{inx} = i n e^{inx} + i eps n(n+1)/2 e^{i(n+1)x} - i eps n(n-1)/2 e^{i(n-1)x},

and ``L* y = eps*(sin x y')' - y'``.  Everything below is finite coefficient
algebra, so identities such as ``L = M S`` and ``L = J L* J`` are checked to
rounding level.
"""

from __future__ import annotations

import numpy as np

from .eigen import smallest_singular_value
from .fourier import build_M_matrix, validate_epsilon
from .trigpoly import TrigPoly

__all__ = [
    "apply_L",
    "apply_L_star",
    "apply_S",
    "apply_M",
    "apply_J",
    "check_JLJ",
    "check_LMS",
    "norm_g",
    "norm_m",
    "p2_constant",
    "p3_constant",
    "estimate_p1",
    "check_theta_constraints",
    "check_M_mean_invariance",
]


def _apply_second_order(y: TrigPoly, eps: float, sign: float) -> TrigPoly:
    # With x = y' the output mode k is sign*x_k + (s x_{k-1} - s x_{k+1}),
    # s = eps*k/2.  This is the same float arithmetic as M applied to y'
    # through its banded matrix, and it is symmetric under k -> -k.
    x = np.pad(y.derivative().coeffs, 1)
    k = np.arange(-(y.degree + 1), y.degree + 2, dtype=float)
    s = eps * k / 2
    off = np.zeros_like(x)
    off[1:] = s[1:] * x[:-1]
    off[:-1] = off[:-1] + (-eps * k[:-1] / 2) * x[1:]
    return TrigPoly(sign * x + off)


def apply_L(y: TrigPoly, eps: float, *, allow_out_of_range: bool = False) -> TrigPoly:
    """``eps*(sin x y')' + y'`` by the exact mode recurrence (degree grows by 1)."""
    validate_epsilon(eps, allow_out_of_range)
    return _apply_second_order(y, float(eps), +1.0)


def apply_L_star(y: TrigPoly, eps: float, *, allow_out_of_range: bool = False) -> TrigPoly:
    """Formal adjoint ``eps*(sin x y')' - y'``."""
    validate_epsilon(eps, allow_out_of_range)
    return _apply_second_order(y, float(eps), -1.0)


def apply_S(y: TrigPoly) -> TrigPoly:
    """Periodic first derivative."""
    return y.derivative()


def apply_M(y: TrigPoly, eps: float, *, allow_out_of_range: bool = False) -> TrigPoly:
    """``eps*(sin x y)' + y`` through the banded matrix of :func:`build_M_matrix`."""
    N = y.degree + 1
    Mmat = build_M_matrix(N, eps, allow_out_of_range=allow_out_of_range)
    return TrigPoly(Mmat.matvec(y.padded(N).coeffs))


def apply_J(y: TrigPoly) -> TrigPoly:
    """Krein metric ``(J f)(x) = f(pi - x)``."""
    return y.reflect()


def check_JLJ(y: TrigPoly, eps: float, **kw) -> float:
    """Coefficientwise max-abs of ``J L* J y - L y``."""
    lhs = apply_J(apply_L_star(apply_J(y), eps, **kw))
    return lhs.max_abs_diff(apply_L(y, eps, **kw))


def check_LMS(y: TrigPoly, eps: float, **kw) -> float:
    """Coefficientwise max-abs of ``L y - M(S y)``."""
    return apply_L(y, eps, **kw).max_abs_diff(apply_M(apply_S(y), eps, **kw))


def norm_g(y: TrigPoly, eps: float, **kw) -> float:
    """Graph norm ``sqrt(||y||^2 + ||L y||^2)``."""
    return float(np.hypot(y.norm(), apply_L(y, eps, **kw).norm()))


def norm_m(y: TrigPoly) -> float:
    """``sqrt(||y'||^2 + ||sin x y'||^2 + ||(sin x y')'||^2)``; vanishes on constants."""
    dy = y.derivative()
    s = dy.mul_sin()
    return float(np.sqrt(dy.norm() ** 2 + s.norm() ** 2 + s.derivative().norm() ** 2))


def p2_constant(eps: float) -> float:
    """Upper equivalence constant ``max(3, 2 eps)``."""
    return max(3.0, 2.0 * float(eps))


def p3_constant(p1: float) -> float:
    """Lower equivalence constant ``min(p1 / 6, 1 / 2)``."""
    return min(p1 / 6.0, 0.5)


def estimate_p1(N: int, eps: float, *, method: str = "auto", **kw) -> float:
    """Smallest singular value of the ``M`` matrix on modes ``-N..N``.

    This is an empirical value for the constant in ``||M y|| >= p1 ||y||``.
    Since the Hermitian part of the truncated ``M`` is bounded below by
    ``1 - eps/2``, so is the returned value, for every ``N``.
    """
    return smallest_singular_value(build_M_matrix(N, eps, **kw), method=method)


def check_theta_constraints(y: TrigPoly) -> tuple[float, float]:
    """``(|int_0^pi theta|, |int_{-pi}^0 theta|)`` for ``theta = (sin x y)'``."""
    theta = y.mul_sin().derivative()
    return abs(theta.integrate(0.0, np.pi)), abs(theta.integrate(-np.pi, 0.0))


def check_M_mean_invariance(y: TrigPoly, eps: float, **kw) -> float:
    """``|mean(M y) - mean(y)|`` with ``M`` applied through its banded matrix."""
    return abs(apply_M(y, eps, **kw).mean - y.mean)
