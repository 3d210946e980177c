# ============================================================================
# QUADRATURE
# File: src/numerics/quadrature.py
# Purpose: Gauss-Legendre rules, composite panel rules and Nystrom assembly
#          of Birman-Schwinger kernels
# ============================================================================

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.numerics.detcore import det_regularized
from src.numerics.errors import IntervalError, KernelSingularityError

logger = logging.getLogger(__name__)

Kernel = Callable[[np.ndarray, np.ndarray], np.ndarray]
Profile = Callable[[np.ndarray], np.ndarray]

DEFAULT_SIDE_POINTS = 24


@dataclass(frozen=True)
class QuadratureRule:
    """
    Nodes and positive weights on [a, b].

    Composite rules also carry their panel breaks and per-panel order so that
    product integration can recover the local interpolation basis.
    """

    nodes: np.ndarray
    weights: np.ndarray
    interval: Tuple[float, float]
    breaks: Optional[np.ndarray] = None
    order: Optional[int] = None

    def __post_init__(self):
        if len(self.nodes) != len(self.weights):
            raise IntervalError("nodes and weights differ in length")
        if np.any(self.weights <= 0):
            raise IntervalError("quadrature weights must be positive")
        if len(self.nodes) > 1 and np.any(np.diff(self.nodes) <= 0):
            raise IntervalError("nodes must be strictly increasing")

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def panels(self) -> int:
        return 1 if self.breaks is None else len(self.breaks) - 1

    def panel_slices(self) -> List[slice]:
        q = self.order if self.order is not None else self.size
        return [slice(p * q, (p + 1) * q) for p in range(self.panels)]

    def panel_edges(self) -> List[Tuple[float, float]]:
        if self.breaks is None:
            return [self.interval]
        return [(float(self.breaks[p]), float(self.breaks[p + 1])) for p in range(self.panels)]

    def integrate(self, values: np.ndarray) -> complex:
        return np.sum(self.weights * values)


@dataclass
class DiscretizedBSOperator:
    """
    Dense Nystrom matrix of a Birman-Schwinger operator on a rule.

    `trace` is the quadrature of the kernel diagonal, int u g(x, x) v rho dx,
    when the kernel is continuous there. det_1 is then det_2 of the matrix
    times exp(trace), which keeps the spectral accuracy of det_2.
    """

    matrix: np.ndarray
    rule: QuadratureRule
    reg_order: int = 2
    meta: dict = field(default_factory=dict)
    trace: Optional[complex] = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def determinant(self, p: Optional[int] = None) -> complex:
        p = self.reg_order if p is None else p
        if p == 1 and self.trace is not None:
            return det_regularized(self.matrix, 2) * np.exp(self.trace)
        return det_regularized(self.matrix, p)


# ===== RULES =====

def gauss_legendre(n: int, a: float, b: float) -> QuadratureRule:
    """
    n-point Gauss-Legendre rule on [a, b].

    Args:
        n: number of nodes (>= 1)
        a: left end
        b: right end

    Returns:
        QuadratureRule whose weights sum to b - a
    """
    if n < 1:
        raise IntervalError(f"Gauss-Legendre needs n >= 1, got {n}")
    if not a < b:
        raise IntervalError(f"Invalid interval [{a}, {b}]")
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return QuadratureRule(
        nodes=half * x + 0.5 * (a + b),
        weights=half * w,
        interval=(float(a), float(b)),
        breaks=np.array([a, b], dtype=float),
        order=n,
    )


def panel_rule(n_per_panel: int, breaks: Sequence[float]) -> QuadratureRule:
    """Composite Gauss-Legendre rule with n_per_panel nodes on each [breaks[i], breaks[i+1]]."""
    breaks = np.asarray(breaks, dtype=float)
    if breaks.ndim != 1 or len(breaks) < 2 or np.any(np.diff(breaks) <= 0):
        raise IntervalError(f"Panel breaks must be strictly increasing, got {breaks}")
    x, w = np.polynomial.legendre.leggauss(n_per_panel)
    nodes, weights = [], []
    for left, right in zip(breaks[:-1], breaks[1:]):
        half = 0.5 * (right - left)
        nodes.append(half * x + 0.5 * (left + right))
        weights.append(half * w)
    return QuadratureRule(
        nodes=np.concatenate(nodes),
        weights=np.concatenate(weights),
        interval=(float(breaks[0]), float(breaks[-1])),
        breaks=breaks,
        order=n_per_panel,
    )


def graded_breaks(panels: int, a: float, b: float, ratio: float = 0.5) -> np.ndarray:
    """Panel edges on [a, b] shrinking geometrically toward a."""
    if panels < 1:
        raise IntervalError(f"panels must be >= 1, got {panels}")
    if not a < b:
        raise IntervalError(f"Invalid interval [{a}, {b}]")
    inner = a + (b - a) * ratio ** np.arange(panels - 1, 0, -1)
    return np.concatenate([[a], inner, [b]])


def halfline_rule(n_per_panel: int, panels: int, cutoff: float, ratio: float = 0.5) -> QuadratureRule:
    """Composite rule on [0, R] with panels graded toward the origin."""
    if not cutoff > 0:
        raise IntervalError(f"Cutoff must be positive, got {cutoff}")
    if panels == 1:
        return gauss_legendre(n_per_panel, 0.0, cutoff)
    return panel_rule(n_per_panel, graded_breaks(panels, 0.0, cutoff, ratio))


def rule_for_support(
    cutoff: float,
    nodes: int,
    n_per_panel: int = 16,
    breakpoints: Sequence[float] = (),
) -> QuadratureRule:
    """
    Composite rule on [0, cutoff] with roughly `nodes` nodes.

    Extra breakpoints (jumps of the potential) become panel edges.
    """
    panels = max(1, int(round(nodes / n_per_panel)))
    edges = np.linspace(0.0, cutoff, panels + 1)
    min_gap = 1e-3 * cutoff / panels
    for x in breakpoints:
        x = float(x)
        if 0.0 < x < cutoff and np.min(np.abs(edges - x)) > min_gap:
            edges = np.sort(np.append(edges, x))
    return panel_rule(n_per_panel, edges)


def truncation_cutoff(im_sqrt_z: float, support: float, envelope: float = 1e-12) -> float:
    """Smallest R covering the support with e^{-Im(sqrt z) R} below the envelope."""
    if im_sqrt_z <= 0:
        return float(support)
    return float(max(support, -np.log(envelope) / im_sqrt_z))


def separable_kernel(inner: Profile, outer: Profile) -> Kernel:
    """
    Kernel g(x, y) = inner(min(x, y)) * outer(max(x, y)).

    Both factors are evaluated on the broadcast axes separately, so a
    (n, 1) x (1, m) request costs n + m evaluations of each.
    """

    def kernel(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        X, Y = np.asarray(X, dtype=float), np.asarray(Y, dtype=float)
        ix, ox = inner(X), outer(X)
        iy, oy = inner(Y), outer(Y)
        return np.where(X <= Y, ix * oy, iy * ox)

    return kernel


# ===== PLAIN NYSTROM =====

def _evaluate_kernel(kernel: Kernel, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    values = np.asarray(kernel(X, Y), dtype=complex)
    if values.shape != np.broadcast(X, Y).shape:
        values = np.broadcast_to(values, np.broadcast(X, Y).shape).astype(complex)
    return values


def _check_finite(values: np.ndarray, X: np.ndarray, Y: np.ndarray) -> None:
    bad = ~np.isfinite(values)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        x = np.broadcast_to(X, values.shape)[i, j]
        y = np.broadcast_to(Y, values.shape)[i, j]
        raise KernelSingularityError(
            f"Kernel is not finite at node pair ({i}, {j}) = ({x:.6g}, {y:.6g})", node_pair=(int(i), int(j))
        )


def assemble_bs(kernel: Kernel, rule: QuadratureRule, p: int = 2) -> DiscretizedBSOperator:
    """
    Symmetrized Nystrom matrix M_ij = sqrt(w_i) k(x_i, x_j) sqrt(w_j).

    The kernel must broadcast over numpy arrays.
    """
    x = rule.nodes
    X, Y = x[:, None], x[None, :]
    values = _evaluate_kernel(kernel, X, Y)
    _check_finite(values, X, Y)
    s = np.sqrt(rule.weights)
    return DiscretizedBSOperator(matrix=s[:, None] * values * s[None, :], rule=rule, reg_order=p)


# ===== PRODUCT INTEGRATION FOR KERNELS WITH A DIAGONAL KINK =====

def _barycentric_weights(t: np.ndarray) -> np.ndarray:
    diff = t[:, None] - t[None, :]
    np.fill_diagonal(diff, 1.0)
    scale = (t.max() - t.min()) / 4.0 if len(t) > 1 else 1.0
    return 1.0 / np.prod(diff / scale, axis=1)


def lagrange_basis(t: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Values l_j(s_k) of the Lagrange basis on nodes t, shape (len(s), len(t))."""
    bw = _barycentric_weights(t)
    diff = s[:, None] - t[None, :]
    exact = diff == 0.0
    terms = bw[None, :] / np.where(exact, 1.0, diff)
    basis = terms / terms.sum(axis=1, keepdims=True)
    hit = exact.any(axis=1)
    if np.any(hit):
        basis[hit] = exact[hit].astype(float)
    return basis


def product_integration_matrix(
    kernel: Kernel,
    rule: QuadratureRule,
    density: Optional[Profile] = None,
    side_points: int = DEFAULT_SIDE_POINTS,
) -> np.ndarray:
    """
    W with (K f)(x_i) ~ sum_j W_ij f(x_j) for K f(x) = int g(x, y) rho(y) f(y) dy.

    Off-panel entries are g(x_i, x_j) rho(x_j) w_j. Within the panel holding
    x_i, the kernel is integrated against the panel's Lagrange basis on
    [left, x_i] and [x_i, right] separately, so a derivative jump of g on the
    diagonal costs no accuracy.
    """
    if rule.order is None or rule.breaks is None:
        raise IntervalError("product integration needs a composite panel rule")
    x, w = rule.nodes, rule.weights
    rho = np.ones_like(x) if density is None else np.asarray(density(x), dtype=float)
    X, Y = x[:, None], x[None, :]
    W = _evaluate_kernel(kernel, X, Y)
    _check_finite(W, X, Y)
    W = W * (rho * w)[None, :]

    g, gw = np.polynomial.legendre.leggauss(side_points)
    unit = 0.5 * (g + 1.0)
    for sl, (left, right) in zip(rule.panel_slices(), rule.panel_edges()):
        t = x[sl]
        q = len(t)
        left_pts = left + (t - left)[:, None] * unit[None, :]
        right_pts = t[:, None] + (right - t)[:, None] * unit[None, :]
        S = np.hstack([left_pts, right_pts])
        SW = np.hstack([0.5 * (t - left)[:, None] * gw[None, :], 0.5 * (right - t)[:, None] * gw[None, :]])
        G = _evaluate_kernel(kernel, t[:, None], S)
        _check_finite(G, t[:, None], S)
        if density is not None:
            G = G * np.asarray(density(S), dtype=float)
        basis = lagrange_basis(t, S.ravel()).reshape(q, S.shape[1], q)
        W[sl, sl] = np.einsum("is,isj->ij", G * SW, basis)
    return W


def assemble_bs_kinked(
    kernel: Kernel,
    rule: QuadratureRule,
    u: np.ndarray,
    v: np.ndarray,
    density: Optional[Profile] = None,
    p: int = 2,
    side_points: int = DEFAULT_SIDE_POINTS,
) -> DiscretizedBSOperator:
    """
    Nystrom matrix of f -> u(x) int g(x, y) v(y) f(y) rho(y) dy by product integration.

    Returned in the symmetrized form D^{1/2} diag(u) W diag(v) D^{-1/2},
    D = diag(rho w), which is similar to the plain product-integration matrix
    and coincides with sqrt(rho_i w_i) u_i g_ij v_j sqrt(rho_j w_j) off the
    diagonal panels.
    """
    W = product_integration_matrix(kernel, rule, density=density, side_points=side_points)
    rho = np.ones_like(rule.nodes) if density is None else np.asarray(density(rule.nodes), dtype=float)
    s = np.sqrt(rho * rule.weights)
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    matrix = (s * u)[:, None] * W * (v / s)[None, :]
    return DiscretizedBSOperator(
        matrix=matrix,
        rule=rule,
        reg_order=p,
        meta={"assembly": "product"},
        trace=diagonal_trace(kernel, rule, u, v, density) if p == 1 else None,
    )


def diagonal_trace(
    kernel: Kernel,
    rule: QuadratureRule,
    u: np.ndarray,
    v: np.ndarray,
    density: Optional[Profile] = None,
) -> complex:
    """sum_i rho_i w_i u_i g(x_i, x_i) v_i, the rule applied to the kernel diagonal."""
    x = rule.nodes
    diagonal = _evaluate_kernel(kernel, x, x)
    if not np.all(np.isfinite(diagonal)):
        i = int(np.argmin(np.isfinite(diagonal)))
        raise KernelSingularityError(f"Kernel diagonal is not finite at x = {x[i]:.6g}", node_pair=(i, i))
    rho = np.ones_like(x) if density is None else np.asarray(density(x), dtype=float)
    return complex(np.sum(rho * rule.weights * np.asarray(u) * diagonal * np.asarray(v)))


def nystrom_refinement(
    build: Callable[[int], DiscretizedBSOperator],
    sizes: Sequence[int],
    p: int = 2,
) -> List[Tuple[int, complex, float]]:
    """
    Determinants along a refinement sequence.

    Returns:
        (size, det_p, |det_p(size) - det_p(previous)|) per size; the first
        increment is NaN
    """
    history: List[Tuple[int, complex, float]] = []
    previous: Optional[complex] = None
    for n in sizes:
        value = build(n).determinant(p)
        increment = float("nan") if previous is None else abs(value - previous)
        history.append((n, value, increment))
        logger.debug(f"nystrom n={n}: det_{p}={value:.15g} increment={increment:.3e}")
        previous = value
    return history
