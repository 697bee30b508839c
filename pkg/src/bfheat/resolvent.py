"""Explicit solution of ``L y = phi`` by singular-weight panel quadrature.

With ``w = sin x * y'`` the equation becomes ``eps w' + w / sin x = phi``.  The
integrating factor is ``tan(|x|/2)^{1/eps}``, which vanishes at 0 and blows
up at +-pi; the unique solution that stays in L^2 near 0 is

    y'(x) = 1/(eps sin x) * int_0^x exp((l(t) - l(x)) / eps) phi(t) dt,
    l(t) = log tan(|t|/2).

The kernel ratio never exceeds 1 for ``|t| <= |x|``, so it is evaluated in
log space and no intermediate quantity overflows.  Panels are Gauss-Legendre,
graded geometrically toward 0 and +-pi.  The inner integral is accumulated
panel by panel as a prefix sum, with a per-node sub-rule for the partial panel.
``y`` is then recovered by spectral integration on each panel and normalized
to zero mean, since constants span the kernel of L.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import legendre as leg

from .errors import QuadratureFailure, Unsolvable
from .fourier import validate_epsilon
from .trigpoly import TrigPoly

__all__ = ["QuadratureGrid", "make_grid", "ResolventSolution", "solve_L", "mean_and_rms"]

_INNER_LOG_NODES = 48


def _reference_rule(m: int):
    xi, om = leg.leggauss(m)
    V = leg.legvander(xi, m - 1)
    Vinv = np.linalg.inv(V)
    # antiderivatives from -1 and derivatives of each Legendre polynomial
    eye = np.eye(m)
    Vint = np.column_stack([leg.legval(xi, leg.legint(eye[k], lbnd=-1)) for k in range(m)])
    Vder = np.column_stack([leg.legval(xi, leg.legder(eye[k])) for k in range(m)])
    return xi, om, Vint @ Vinv, Vder @ Vinv


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Composite Gauss-Legendre grid on (-pi, pi), graded toward 0 and +-pi.

    Attributes
    ----------
    nodes, weights : ndarray
        Strictly increasing nodes (never 0 or +-pi) and quadrature weights.
    log_weight : ndarray
        ``(1/eps) log tan(|t|/2)`` at the nodes.
    sin_nodes : ndarray
        ``sin`` at the nodes, computed from the distance to the nearest
        singular point so it keeps full relative accuracy.
    """

    eps: float
    nodes_per_panel: int
    grading: float
    levels: int
    nodes: np.ndarray
    weights: np.ndarray
    log_weight: np.ndarray
    sin_nodes: np.ndarray
    edges: np.ndarray
    half_widths: np.ndarray
    # half-line (0, pi) panel data: edges a < b, distances to pi sa > sb,
    # and whether the panel lies in the quarter nearest pi
    _half: dict = field(repr=False, default_factory=dict)

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def n_panels(self) -> int:
        return self.edges.size - 1

    def params(self) -> dict:
        return dict(eps=self.eps, nodes_per_panel=self.nodes_per_panel,
                    grading=self.grading, levels=self.levels, n_nodes=self.size)


def make_grid(eps: float, nodes_per_panel: int = 16, grading: float = 0.5,
              levels: int = 31, *, allow_out_of_range: bool = False) -> QuadratureGrid:
    """Build the graded grid.

    Each quarter ``(0, pi/2)``, ``(pi/2, pi)`` and their mirrors carries
    ``levels + 1`` panels with edges at distance ``(pi/2) * grading**k`` from
    the singular end, so the default gives ``4 * 32 * 16 = 2048`` nodes.
    """
    validate_epsilon(eps, allow_out_of_range)
    if not (0 < grading < 1):
        raise ValueError("grading ratio must lie in (0, 1)")
    if nodes_per_panel < 2 or levels < 0:
        raise ValueError("need nodes_per_panel >= 2 and levels >= 0")
    m = nodes_per_panel
    dist = (np.pi / 2) * grading ** np.arange(levels + 1)   # pi/2, pi/2*r, ...
    left = np.concatenate(([0.0], dist[::-1]))             # 0 < ... < pi/2
    sa_right = dist                                          # pi/2 > ... (distance to pi)
    sb_right = np.append(dist[1:], 0.0)
    a = np.concatenate((left[:-1], np.pi - sa_right))
    b = np.concatenate((left[1:], np.pi - sb_right))
    b[levels] = np.pi / 2
    sa = np.concatenate((np.pi - left[:-1], sa_right))
    sb = np.concatenate((np.pi - left[1:], sb_right))
    near = np.concatenate((np.zeros(levels + 1, bool), np.ones(levels + 1, bool)))
    half = dict(a=a, b=b, sa=sa, sb=sb, near=near)

    xi, om, _, _ = _reference_rule(m)
    t, s = _panel_points(half, xi)
    hw = _half_widths(half)
    w_half = hw[:, None] * om[None, :]
    lw = _logtan_half(t, s, near[:, None]) / eps
    sn = _sin(t, s, near[:, None])

    nodes = np.concatenate((-t[::-1, ::-1].ravel(), t.ravel()))
    weights = np.concatenate((w_half[::-1, ::-1].ravel(), w_half.ravel()))
    log_weight = np.concatenate((lw[::-1, ::-1].ravel(), lw.ravel()))
    sin_nodes = np.concatenate((-sn[::-1, ::-1].ravel(), sn.ravel()))
    edges = np.concatenate((-b[::-1], a[:1], b))
    return QuadratureGrid(float(eps), m, float(grading), int(levels), nodes, weights,
                          log_weight, sin_nodes, edges, np.concatenate((hw[::-1], hw)), half)


def _panel_points(half, xi):
    """Points ``a + (b-a)(xi+1)/2`` per panel, with their distances to pi."""
    frac = (xi + 1) / 2
    t = half["a"][:, None] + (half["b"] - half["a"])[:, None] * frac
    s = half["sa"][:, None] - (half["sa"] - half["sb"])[:, None] * frac
    return t, s


def _half_widths(half):
    return np.where(half["near"], half["sa"] - half["sb"], half["b"] - half["a"]) / 2


def _logtan_half(t, s, near):
    with np.errstate(divide="ignore"):
        return np.where(near, -np.log(np.tan(s / 2)), np.log(np.tan(t / 2)))


def _sin(t, s, near):
    return np.where(near, np.sin(s), np.sin(t))


def _half_line_derivative(phi: Callable, grid: QuadratureGrid):
    """``y'`` at the (0, pi) nodes for right-hand side ``phi`` (vectorized callable)."""
    eps = grid.eps
    half = grid._half
    near = half["near"]
    K = near.size
    xi, om, _, _ = _reference_rule(grid.nodes_per_panel)
    frac = (xi + 1) / 2
    t, s = _panel_points(half, xi)                          # (K, m)
    ell_x = _logtan_half(t, s, near[:, None])

    # per-node sub-rule on [a, x_q]
    len_q = np.where(near[:, None], half["sa"][:, None] - s, t - half["a"][:, None])
    tau = half["a"][:, None, None] + len_q[:, :, None] * frac[None, None, :]
    sig = half["sa"][:, None, None] - len_q[:, :, None] * frac[None, None, :]
    ell_tau = _logtan_half(tau, sig, near[:, None, None])
    phi_tau = np.asarray(phi(tau), dtype=complex)
    ker = np.exp((ell_tau - ell_x[:, :, None]) / eps)
    partial = np.sum(ker * phi_tau * om[None, None, :], axis=2) * len_q / 2

    # The panel touching pi has nodes far closer to pi than its width, where
    # the kernel (s_x / s)^{1/eps} is sharply peaked; substitute s = s_x e^v.
    last = K - 1
    sq = s[last]
    span = np.log(half["sa"][last] / sq)
    if eps < 1:
        span = np.minimum(span, 50 * eps / (1 - eps))
    xv, ov = leg.leggauss(_INNER_LOG_NODES)
    v = span[:, None] * (xv[None, :] + 1) / 2
    sig_l = sq[:, None] * np.exp(v)
    tau_l = np.pi - sig_l
    ker_l = np.exp((_logtan_half(tau_l, sig_l, True) - ell_x[last][:, None]) / eps)
    phi_l = np.asarray(phi(tau_l), dtype=complex)
    partial[last] = np.sum(ker_l * phi_l * sig_l * ov[None, :], axis=1) * span / 2

    # full panel integrals referenced to the right edge b
    ell_a = _logtan_half(half["a"], half["sa"], near)
    ell_b = _logtan_half(half["b"], half["sb"], near)
    phi_nodes = np.asarray(phi(t), dtype=complex)
    hw = _half_widths(half)
    with np.errstate(invalid="ignore"):
        ker_b = np.exp((ell_x - ell_b[:, None]) / eps)
    ker_b = np.nan_to_num(ker_b, nan=0.0)
    full = np.sum(ker_b * phi_nodes * om[None, :], axis=1) * hw

    # prefix accumulation W(a_j) = int_0^{a_j}, always in normalized form
    with np.errstate(invalid="ignore"):
        rho = np.nan_to_num(np.exp((ell_a - ell_b) / eps), nan=0.0)
    W = np.zeros(K + 1, dtype=complex)
    for j in range(K):
        W[j + 1] = rho[j] * W[j] + full[j] / eps
    ratio_a = np.nan_to_num(np.exp((ell_a[:, None] - ell_x) / eps), nan=0.0)
    w = ratio_a * W[:K, None] + partial / eps
    return w / _sin(t, s, near[:, None])


def mean_and_rms(phi, n: int = 4096):
    """Mean and RMS of ``phi`` over one period.

    Exact for a :class:`TrigPoly`; periodic trapezoid rule on ``n`` points
    for a callable.
    """
    if isinstance(phi, TrigPoly):
        return phi.mean, phi.norm() / np.sqrt(2 * np.pi)
    x = -np.pi + 2 * np.pi * np.arange(n) / n
    v = np.asarray(phi(x), dtype=complex)
    return complex(v.mean()), float(np.sqrt(np.mean(np.abs(v) ** 2)))


@dataclass
class ResolventSolution:
    """Sampled zero-mean solution of ``L y = phi`` on a quadrature grid."""

    x: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    weights: np.ndarray
    residual: float
    periodicity_defect: float
    grid: QuadratureGrid

    def error_against(self, exact: Callable) -> float:
        """Max nodal deviation from ``exact`` after removing its mean."""
        ref = np.asarray(exact(self.x), dtype=complex)
        ref = ref - np.sum(self.weights * ref) / (2 * np.pi)
        return float(np.max(np.abs(self.y - ref)))

    def to_csv(self, config: dict | None = None) -> str:
        buf = io.StringIO()
        buf.write(f"# {json.dumps(self.report(config))}\n")
        w = csv.writer(buf, lineterminator="\n")
        cplx = np.iscomplexobj(self.y)
        w.writerow(["x", "y", "dy"] + (["y_im", "dy_im"] if cplx else []))
        for x, y, d in zip(self.x, self.y, self.dy):
            row = [repr(float(x)), repr(float(np.real(y))), repr(float(np.real(d)))]
            if cplx:
                row += [repr(float(np.imag(y))), repr(float(np.imag(d)))]
            w.writerow(row)
        return buf.getvalue()

    def report(self, config: dict | None = None) -> dict:
        doc = {"grid": self.grid.params(), "residual": self.residual,
               "periodicity_defect": self.periodicity_defect}
        if config:
            doc["config"] = config
        return doc


def solve_L(phi, eps: float, grid: QuadratureGrid | None = None, *,
            tol: float = 1e-6, mean_tol: float = 1e-10,
            allow_out_of_range: bool = False) -> ResolventSolution:
    """Zero-mean solution of ``eps*(sin x y')' + y' = phi``.

    Parameters
    ----------
    phi : TrigPoly or callable
        Right-hand side; callables must accept arrays of points in (-pi, pi).
    eps : float
        Diffusion parameter in (0, 2).
    grid : QuadratureGrid, optional
        Defaults to :func:`make_grid` with its default parameters.
    tol : float
        Bound on the relative a posteriori residual ``||L y - phi|| / ||phi||``
        (grid L^2 norms, ``L y`` formed by panelwise spectral differentiation)
        and on the periodicity defect ``|y(pi) - y(-pi)| / ||phi||``.
    mean_tol : float
        ``phi`` is rejected when ``|mean(phi)| > mean_tol * rms(phi)``.

    Raises
    ------
    Unsolvable
        If ``phi`` has a nonzero mean (constants are outside the range of L).
    QuadratureFailure
        If the a posteriori checks exceed ``tol``.
    """
    validate_epsilon(eps, allow_out_of_range)
    if grid is None:
        grid = make_grid(eps, allow_out_of_range=allow_out_of_range)
    elif grid.eps != float(eps):
        raise ValueError(f"grid was built for eps={grid.eps}, not {eps}")
    mean, rms = mean_and_rms(phi)
    if abs(mean) > mean_tol * rms or (rms == 0 and mean != 0):
        raise Unsolvable(
            f"mean(phi) = {mean:.3e} is not zero; a periodic y cannot satisfy "
            "L y = phi because y' would have nonzero integral"
        )

    u_pos = _half_line_derivative(phi, grid)
    u_neg = _half_line_derivative(lambda t: phi(-t), grid)
    dy = np.concatenate((u_neg[::-1, ::-1].ravel(), u_pos.ravel()))

    m = grid.nodes_per_panel
    _, om, Q, D = _reference_rule(m)
    panels = dy.reshape(-1, m)
    hw = grid.half_widths
    local = (panels @ Q.T) * hw[:, None]
    totals = (panels * om[None, :]).sum(axis=1) * hw
    offsets = np.concatenate(([0.0], np.cumsum(totals)[:-1]))
    y = (local + offsets[:, None]).ravel()
    y = y - np.sum(grid.weights * y) / (2 * np.pi)
    defect = abs(np.sum(totals))

    w_full = (grid.sin_nodes * dy).reshape(-1, m)
    dw = (w_full @ D.T) / hw[:, None]
    phi_x = np.asarray(phi(grid.nodes), dtype=complex)
    r = eps * dw.ravel() + dy - phi_x
    res = float(np.sqrt(np.sum(grid.weights * np.abs(r) ** 2)))
    scale = float(np.sqrt(np.sum(grid.weights * np.abs(phi_x) ** 2)))
    if scale > 0:
        res /= scale
        defect /= scale

    if _is_real(phi, phi_x):
        y, dy = y.real, dy.real
    sol = ResolventSolution(grid.nodes, y, dy, grid.weights, res, float(defect), grid)
    if res > tol or defect > tol:
        raise QuadratureFailure(
            f"a posteriori residual {res:.3e} / periodicity defect {defect:.3e} "
            f"exceed tol={tol:.1e}"
        )
    return sol


def _is_real(phi, phi_x) -> bool:
    if isinstance(phi, TrigPoly):
        return phi.is_real(1e-14 * max(1.0, float(np.max(np.abs(phi.coeffs)))))
    return bool(np.max(np.abs(phi_x.imag), initial=0.0) == 0.0)
