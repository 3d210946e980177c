# ============================================================================
# HALF-LINE SCHRODINGER OPERATORS
# File: src/spectral/halfline.py
# Purpose: Jost and regular solutions, m-functions, Dirichlet/Neumann
#          Birman-Schwinger determinants and the boundary-data identities
#          relating them on (0, inf)
# ============================================================================

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import linalg
from scipy.integrate import simpson
from scipy.optimize import brentq

from src.numerics.detcore import det_fredholm
from src.numerics.errors import (
    DirichletEigenvalueSignal,
    IterationError,
    NeumannEigenvalueSignal,
)
from src.numerics.quadrature import QuadratureRule, assemble_bs_kinked, product_integration_matrix
from src.numerics.specfun import SpectralParam, as_param
from src.spectral.potentials import Potential

logger = logging.getLogger(__name__)

DEFAULT_GRID = 2048
DEFAULT_NODES = 256
PICARD_MAX_ITER = 200
PICARD_TOL = 1e-10
PSI_GUARD = 1e-8
M_GUARD = 1e-14

Spectral = Union[complex, float, SpectralParam]


# ===== DATA TYPES =====

@dataclass
class JostSolution:
    """f(z, x) sampled on [0, a]; f = e^{ikx} beyond a."""

    z: SpectralParam
    grid: np.ndarray
    f_values: np.ndarray
    fprime_values: np.ndarray
    f0: complex
    fprime0: complex

    def psi(self) -> np.ndarray:
        """f / f(0), guarded against Dirichlet eigenvalues."""
        if abs(self.f0) < PSI_GUARD * (1.0 + abs(self.fprime0)):
            raise DirichletEigenvalueSignal(f"f(z, 0) ~ 0 at z={self.z.z}: Dirichlet eigenvalue nearby", z=self.z.z)
        return self.f_values / self.f0


@dataclass
class SampledSolution:
    grid: np.ndarray
    values: np.ndarray
    derivatives: np.ndarray


@dataclass
class MFunctions:
    m0D: complex
    m0N: complex
    mD: complex
    mN: complex


# ===== ELEMENTARY KERNELS =====

def sin_over_k(k: complex, x) -> np.ndarray:
    """sin(k x)/k, analytic at k = 0."""
    return np.asarray(x) * np.sinc(k * np.asarray(x) / np.pi)


def green_dirichlet(z: Spectral, x, xp) -> np.ndarray:
    """sin(k x<) e^{i k x>} / k."""
    k = as_param(z).sqrt_z
    lo, hi = np.minimum(x, xp), np.maximum(x, xp)
    return sin_over_k(k, lo) * np.exp(1j * k * hi)


def green_neumann(z: Spectral, x, xp) -> np.ndarray:
    """cos(k x<) e^{i k x>} / (-i k)."""
    k = as_param(z).sqrt_z
    lo, hi = np.minimum(x, xp), np.maximum(x, xp)
    return np.cos(k * lo) * np.exp(1j * k * hi) / (-1j * k)


# ===== VOLTERRA MARCHING =====

def _trapezoid_grid(a: float, intervals: int) -> Tuple[np.ndarray, float]:
    grid = np.linspace(0.0, a, intervals + 1)
    return grid, a / intervals


def _march_jost(V: Potential, k: complex, intervals: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Backward trapezoid marching of f(x) = e^{ikx} - int_x^a sin(k(x-y))/k V f dy.

    The kernel vanishes on the diagonal, so each step is explicit. The
    derivative kernel cos(k(x-y)) does not, and keeps its half-weight endpoint.
    """
    grid, h = _trapezoid_grid(V.cutoff, intervals)
    Vg = V.sample_for_trapezoid(grid)
    n = len(grid)
    f = np.zeros(n, dtype=complex)
    fp = np.zeros(n, dtype=complex)
    c = np.ones(n)
    c[-1] = 0.5
    f[-1] = np.exp(1j * k * grid[-1])
    fp[-1] = 1j * k * f[-1]
    for i in range(n - 2, -1, -1):
        tail = slice(i + 1, n)
        d = grid[i] - grid[tail]
        weighted = h * c[tail] * Vg[tail] * f[tail]
        f[i] = np.exp(1j * k * grid[i]) - np.dot(sin_over_k(k, d), weighted)
        fp[i] = 1j * k * np.exp(1j * k * grid[i]) - np.dot(np.cos(k * d), weighted) - 0.5 * h * Vg[i] * f[i]
    return grid, f, fp


def _picard_jost(V: Potential, k: complex, intervals: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Picard iteration of the same discretized Volterra equation."""
    grid, h = _trapezoid_grid(V.cutoff, intervals)
    Vg = V.sample_for_trapezoid(grid)
    n = len(grid)
    c = np.ones(n)
    c[-1] = 0.5
    D = grid[:, None] - grid[None, :]
    upper = np.triu(np.ones((n, n)), k=1)
    T = upper * sin_over_k(k, D) * (h * c * Vg)[None, :]
    Tp = upper * np.cos(k * D) * (h * c * Vg)[None, :]
    endpoint = 0.5 * h * Vg
    endpoint[-1] = 0.0
    Tp = Tp + np.diag(endpoint)
    free = np.exp(1j * k * grid)
    f = free.copy()
    residuals: List[float] = []
    for _ in range(PICARD_MAX_ITER):
        f_next = free - T @ f
        residual = np.linalg.norm(f_next - f) / max(np.linalg.norm(f_next), 1e-300)
        residuals.append(float(residual))
        f = f_next
        if residual < PICARD_TOL:
            return grid, f, 1j * k * free - Tp @ f
        if not np.isfinite(residual) or (len(residuals) > 20 and residual > 1e3 * min(residuals)):
            break
    raise IterationError(
        f"Picard iteration did not converge in {len(residuals)} steps (last residual {residuals[-1]:.3e})",
        residuals=residuals,
    )


def _richardson(fine: np.ndarray, coarse: np.ndarray) -> np.ndarray:
    """Second-order extrapolation onto the coarse grid."""
    return (4.0 * fine[::2] - coarse) / 3.0


def jost_solution(V: Potential, z: Spectral, grid_size: int = DEFAULT_GRID, method: str = "march") -> JostSolution:
    """
    Jost solution on [0, a] by Volterra marching with Richardson extrapolation.

    Args:
        V: potential supported on [0, a]
        z: spectral parameter; real positive z is read as lambda + i0
        grid_size: number of intervals of the returned grid (fine grid is twice that)
        method: "march" (default) or "picard" (cross-check)

    Returns:
        JostSolution with extrapolated samples and boundary data
    """
    zp = as_param(z)
    k = zp.sqrt_z
    solver = _march_jost if method == "march" else _picard_jost
    grid, f_c, fp_c = solver(V, k, grid_size)
    _, f_f, fp_f = solver(V, k, 2 * grid_size)
    f = _richardson(f_f, f_c)
    fp = _richardson(fp_f, fp_c)
    logger.debug(f"jost z={zp.z}: f0={f[0]:.12g} f'0={fp[0]:.12g}")
    return JostSolution(z=zp, grid=grid, f_values=f, fprime_values=fp, f0=complex(f[0]), fprime0=complex(fp[0]))


def _march_regular(V: Potential, k: complex, intervals: int, start: str):
    grid, h = _trapezoid_grid(V.cutoff, intervals)
    Vg = V.sample_for_trapezoid(grid)
    n = len(grid)
    if start == "phi":
        free, dfree = sin_over_k(k, grid), np.cos(k * grid)
    else:
        free, dfree = np.cos(k * grid), -k * np.sin(k * grid)
    y = np.zeros(n, dtype=complex)
    dy = np.zeros(n, dtype=complex)
    y[0], dy[0] = free[0], dfree[0]
    c = np.ones(n)
    c[0] = 0.5
    for i in range(1, n):
        head = slice(0, i)
        d = grid[i] - grid[head]
        weighted = h * c[head] * Vg[head] * y[head]
        y[i] = free[i] + np.dot(sin_over_k(k, d), weighted)
        dy[i] = dfree[i] + np.dot(np.cos(k * d), weighted) + 0.5 * h * Vg[i] * y[i]
    return grid, y, dy


def regular_solutions(V: Potential, z: Spectral, grid_size: int = DEFAULT_GRID) -> Tuple[SampledSolution, SampledSolution]:
    """
    phi (phi(0)=0, phi'(0)=1) and theta (theta(0)=1, theta'(0)=0) by forward marching.
    """
    k = as_param(z).sqrt_z
    out = []
    for start in ("phi", "theta"):
        grid, y_c, dy_c = _march_regular(V, k, grid_size, start)
        _, y_f, dy_f = _march_regular(V, k, 2 * grid_size, start)
        out.append(SampledSolution(grid=grid, values=_richardson(y_f, y_c), derivatives=_richardson(dy_f, dy_c)))
    return out[0], out[1]


def wronskian(first: SampledSolution, second: SampledSolution) -> np.ndarray:
    """W(u, w) = u w' - u' w at every grid point."""
    return first.values * second.derivatives - first.derivatives * second.values


def jost_as_sampled(js: JostSolution) -> SampledSolution:
    return SampledSolution(grid=js.grid, values=js.f_values, derivatives=js.fprime_values)


# ===== M-FUNCTIONS =====

def mfunctions(V: Potential, z: Spectral, grid_size: int = DEFAULT_GRID) -> MFunctions:
    """Free and perturbed Dirichlet/Neumann m-functions from the Jost data."""
    zp = as_param(z)
    k = zp.sqrt_z
    js = jost_solution(V, zp, grid_size)
    scale = 1.0 + abs(js.f0) + abs(js.fprime0)
    if abs(js.f0) < M_GUARD * scale:
        raise DirichletEigenvalueSignal(f"f(z, 0) = 0 at z={zp.z}", z=zp.z)
    if abs(js.fprime0) < M_GUARD * scale:
        raise NeumannEigenvalueSignal(f"f'(z, 0) = 0 at z={zp.z}", z=zp.z)
    return MFunctions(m0D=1j * k, m0N=1j / k, mD=js.fprime0 / js.f0, mN=-js.f0 / js.fprime0)


# ===== BIRMAN-SCHWINGER DETERMINANTS =====

def default_rule(V: Potential, nodes: int = DEFAULT_NODES) -> QuadratureRule:
    return V.rule(nodes)


def bs_operator(V: Potential, z: Spectral, boundary: str = "dirichlet", rule: Optional[QuadratureRule] = None):
    """Nystrom matrix of u G_{D|N}(z) v on the potential's support."""
    zp = as_param(z)
    rule = rule if rule is not None else default_rule(V)
    green = green_dirichlet if boundary == "dirichlet" else green_neumann
    u, v = V.factors(rule.nodes)
    return assemble_bs_kinked(lambda x, y: green(zp, x, y), rule, u, v, p=1)


def det_dirichlet(V: Potential, z: Spectral, rule: Optional[QuadratureRule] = None) -> complex:
    """det(I + u G_D(z) v); equals f(z, 0)."""
    return bs_operator(V, z, "dirichlet", rule).determinant(1)


def det_neumann(V: Potential, z: Spectral, rule: Optional[QuadratureRule] = None) -> complex:
    """det(I + u G_N(z) v); equals f'(z, 0) / (i sqrt z)."""
    return bs_operator(V, z, "neumann", rule).determinant(1)


def boundary_ratio_formula(V: Potential, z: Spectral, grid_size: int = DEFAULT_GRID) -> complex:
    """
    1 + (i / sqrt z) int_0^a e^{i sqrt(z) x} V(x) psi(z, x) dx, psi = f / f(0).

    Equals f'(z, 0) / (i sqrt(z) f(z, 0)) = det_N / det_D.
    """
    zp = as_param(z)
    k = zp.sqrt_z
    js = jost_solution(V, zp, grid_size)
    psi = js.psi()
    integrand = np.exp(1j * k * js.grid) * V(js.grid) * psi
    return complex(1.0 + (1j / k) * simpson(integrand, x=js.grid))


def krein_1d_check(z: Spectral, x, xp) -> Dict[str, np.ndarray]:
    """G_D - G_N against the rank-one kernel -i z^{-1/2} e^{i sqrt z (x + x')}."""
    k = as_param(z).sqrt_z
    lhs = green_dirichlet(z, x, xp) - green_neumann(z, x, xp)
    rhs = -1j / k * np.exp(1j * k * (np.asarray(x) + np.asarray(xp)))
    return {"lhs": lhs, "rhs": rhs}


def symmetrized_determinant_check(V: Potential, z: float, rule: Optional[QuadratureRule] = None) -> Dict[str, complex]:
    """
    det(I + U G V) against det(I + G^{1/2} V G^{1/2}) for z < 0.

    G is the symmetrized Dirichlet resolvent matrix and G^{1/2} its Hermitian
    square root.
    """
    zp = as_param(z)
    rule = rule if rule is not None else default_rule(V)
    W = product_integration_matrix(lambda x, y: green_dirichlet(zp, x, y), rule)
    s = np.sqrt(rule.weights)
    G = s[:, None] * W / s[None, :]
    G = 0.5 * (G + G.conj().T)
    u, v = V.factors(rule.nodes)
    direct = det_fredholm(u[:, None] * G * v[None, :])
    evals, Q = linalg.eigh(G)
    root = (Q * np.sqrt(evals.astype(complex))[None, :]) @ Q.conj().T
    symmetric = det_fredholm(root @ np.diag(u * v) @ root)
    return {"direct": direct, "symmetrized": symmetric}


# ===== EIGENVALUES FROM DETERMINANT ZEROS =====

def _real_zeros(func, z_min: float, z_max: float, samples: int) -> List[float]:
    zs = np.linspace(z_min, z_max, samples)
    values = np.array([func(z) for z in zs])
    roots = []
    for i in np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]:
        roots.append(brentq(func, zs[i], zs[i + 1], xtol=1e-13))
    return roots


def dirichlet_eigenvalues(
    V: Potential,
    z_min: Optional[float] = None,
    z_max: float = -1e-3,
    samples: int = 200,
    rule: Optional[QuadratureRule] = None,
) -> List[float]:
    """Negative Dirichlet eigenvalues as sign changes of the (real) det_D for real V."""
    rule = rule if rule is not None else default_rule(V)
    z_min = -V.max_abs() - 1e-9 if z_min is None else z_min
    return _real_zeros(lambda z: det_dirichlet(V, z, rule).real, z_min, z_max, samples)


def neumann_eigenvalues(
    V: Potential,
    z_min: Optional[float] = None,
    z_max: float = -1e-3,
    samples: int = 200,
    rule: Optional[QuadratureRule] = None,
) -> List[float]:
    """Negative Neumann eigenvalues as sign changes of det_N for real V."""
    rule = rule if rule is not None else default_rule(V)
    z_min = -V.max_abs() - 1e-9 if z_min is None else z_min
    return _real_zeros(lambda z: det_neumann(V, z, rule).real, z_min, z_max, samples)
