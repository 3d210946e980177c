# ============================================================================
# DISK DOMAIN
# File: src/spectral/disk_domain.py
# Purpose: Dirichlet-to-Neumann determinant ratio on the unit disk for radial
#          potentials, by Fourier-Bessel modes: determinant side, boundary
#          side, and the mode-wise resolvent-difference factorization
# ============================================================================

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy import linalg, special
from scipy.optimize import brentq

from src.numerics.detcore import SINGULAR_CONDITION, det_regularized
from src.numerics.errors import (
    ChannelTruncationError,
    HypothesisViolationError,
    SpectralPointError,
    SpectralProximityError,
    UsageError,
)
from src.numerics.quadrature import (
    QuadratureRule,
    product_integration_matrix,
    rule_for_support,
    separable_kernel,
)
from src.numerics.specfun import SpectralParam, as_param
from src.spectral.potentials import Potential

logger = logging.getLogger(__name__)

DEFAULT_NODES = 128
MODE_TOL = 1e-10
SPECTRAL_POINT_TOL = 1e-10

DIRICHLET = "dirichlet"
NEUMANN = "neumann"


def degeneracy(m: int) -> int:
    return 1 if m == 0 else 2


def default_mmax(z: complex, cutoff: float) -> int:
    return int(np.ceil(np.sqrt(abs(z)) * cutoff)) + 20


# ===== MODE GREEN FUNCTIONS =====

@dataclass(frozen=True)
class _BoundaryData:
    """J_m, Y_m and derivatives at r = 1."""

    m: int
    k: complex
    J: complex
    Y: complex
    dJ: complex
    dY: complex

    @classmethod
    def at(cls, m: int, zp: SpectralParam) -> "_BoundaryData":
        k = zp.sqrt_z
        return cls(
            m=m,
            k=k,
            J=complex(special.jv(m, k)),
            Y=complex(special.yv(m, k)),
            dJ=complex(special.jvp(m, k)),
            dY=complex(special.yvp(m, k)),
        )

    def check(self, boundary: str) -> None:
        # relative test: J_m(k) itself is tiny for large m at small |k|
        if boundary == DIRICHLET and abs(self.J) < SPECTRAL_POINT_TOL * abs(self.k * self.dJ):
            raise SpectralPointError(f"z={self.k ** 2} is a Dirichlet eigenvalue of the free mode m={self.m}")
        if boundary == NEUMANN and abs(self.k * self.dJ) < SPECTRAL_POINT_TOL * abs(self.J):
            raise SpectralPointError(f"z={self.k ** 2} is a Neumann eigenvalue of the free mode m={self.m}")


def _mode_factors(m: int, zp: SpectralParam, boundary: str):
    """(inner, outer) with g(r, r') = inner(r<) outer(r>)."""
    if boundary not in (DIRICHLET, NEUMANN):
        raise UsageError(f"boundary must be {DIRICHLET!r} or {NEUMANN!r}, got {boundary!r}")
    bd = _BoundaryData.at(m, zp)
    bd.check(boundary)
    k = bd.k
    if boundary == DIRICHLET:
        scale, cJ, cY = np.pi / (2.0 * bd.J), bd.Y, bd.J
    else:
        scale, cJ, cY = np.pi / (2.0 * bd.dJ), bd.dY, bd.dJ

    def inner(r):
        return scale * special.jv(m, k * r)

    def outer(r):
        return special.jv(m, k * r) * cJ - special.yv(m, k * r) * cY

    return inner, outer


def mode_green(m: int, z, boundary: str, r, rp):
    """
    Radial Green kernel of the mode-m Dirichlet or Neumann Laplacian on the
    unit disk, acting on L^2((0, 1]; r dr).

    Dirichlet: (pi / 2 J_m(k)) J_m(k r<) [J_m(k r>) Y_m(k) - Y_m(k r>) J_m(k)]
    Neumann:   (pi / 2 J_m'(k)) J_m(k r<) [J_m(k r>) Y_m'(k) - Y_m(k r>) J_m'(k)]
    """
    r, rp = np.asarray(r, dtype=float), np.asarray(rp, dtype=float)
    if np.any(r <= 0) or np.any(rp <= 0) or np.any(r > 1) or np.any(rp > 1):
        raise UsageError("mode_green needs 0 < r, r' <= 1")
    kernel = separable_kernel(*_mode_factors(m, as_param(z), boundary))
    values = kernel(r, rp)
    return complex(values) if np.ndim(values) == 0 else values


def neumann_trace_of_dirichlet(m: int, z, r) -> np.ndarray:
    """(gamma_N R_D)(r) = d/dr g^D(1, r) = -J_m(k r) / J_m(k)."""
    bd = _BoundaryData.at(m, as_param(z))
    bd.check(DIRICHLET)
    return -special.jv(m, bd.k * np.asarray(r, dtype=float)) / bd.J


def dirichlet_trace_of_neumann(m: int, z, r) -> np.ndarray:
    """(gamma_D R_N)(r) = g^N(1, r) = J_m(k r) / (k J_m'(k))."""
    bd = _BoundaryData.at(m, as_param(z))
    bd.check(NEUMANN)
    return special.jv(m, bd.k * np.asarray(r, dtype=float)) / (bd.k * bd.dJ)


def krein_disk_check(m: int, z, r, rp) -> Dict[str, complex]:
    """
    g^D - g^N against the rank-one boundary product
    [gamma_D R_N](r) [gamma_N R_D](r').
    """
    lhs = mode_green(m, z, DIRICHLET, r, rp) - mode_green(m, z, NEUMANN, r, rp)
    rhs = dirichlet_trace_of_neumann(m, z, r) * neumann_trace_of_dirichlet(m, z, rp)
    return {"lhs": lhs, "rhs": rhs}


# ===== DISCRETIZED MODE OPERATORS =====

def _density(r: np.ndarray) -> np.ndarray:
    return r


@dataclass
class DiskModeOperator:
    """
    Mode-m operators on a composite rule inside (0, 1].

    gD_matrix / gN_matrix hold the kernels at node pairs; wD / wN are their
    product-integration matrices with the r dr measure absorbed, so that
    (R f)(r_i) ~ sum_j W_ij f(r_j). The boundary rows are the traces
    gamma_N R_D and gamma_D R_N sampled at the nodes.
    """

    m: int
    z: SpectralParam
    rule: QuadratureRule
    gD_matrix: np.ndarray
    gN_matrix: np.ndarray
    wD: np.ndarray
    wN: np.ndarray
    boundary_row_D: np.ndarray
    boundary_row_N: np.ndarray

    @property
    def measure(self) -> np.ndarray:
        return self.rule.weights * self.rule.nodes

    def apply(self, boundary: str, values: np.ndarray) -> np.ndarray:
        W = self.wD if boundary == DIRICHLET else self.wN
        return W @ np.asarray(values, dtype=complex)


def disk_mode_operator(m: int, z, rule: QuadratureRule) -> DiskModeOperator:
    zp = as_param(z)
    r = rule.nodes
    if r.max() > 1.0 or r.min() <= 0.0:
        raise UsageError("disk mode rules must lie inside (0, 1]")
    kernel_D = separable_kernel(*_mode_factors(m, zp, DIRICHLET))
    kernel_N = separable_kernel(*_mode_factors(m, zp, NEUMANN))
    X, Y = r[:, None], r[None, :]
    return DiskModeOperator(
        m=m,
        z=zp,
        rule=rule,
        gD_matrix=np.asarray(kernel_D(X, Y), dtype=complex),
        gN_matrix=np.asarray(kernel_N(X, Y), dtype=complex),
        wD=product_integration_matrix(kernel_D, rule, density=_density),
        wN=product_integration_matrix(kernel_N, rule, density=_density),
        boundary_row_D=np.asarray(neumann_trace_of_dirichlet(m, zp, r), dtype=complex),
        boundary_row_N=np.asarray(dirichlet_trace_of_neumann(m, zp, r), dtype=complex),
    )


def disk_rule(V: Potential, nodes: int = DEFAULT_NODES) -> QuadratureRule:
    """Rule on the support of V, which must lie inside the unit disk."""
    if V.dimension != 2:
        raise HypothesisViolationError(f"disk potentials are two-dimensional, got n = {V.dimension}")
    if V.cutoff > 1.0:
        raise HypothesisViolationError(f"potential support {V.cutoff} exceeds the unit disk")
    return rule_for_support(V.cutoff, nodes, breakpoints=V.breakpoints)


# ===== BOTH SIDES OF THE DISK IDENTITY =====

@dataclass
class ModeFactor:
    m: int
    degeneracy: int
    det2_dirichlet: complex
    det2_neumann: complex
    beta: complex
    tau: complex

    @property
    def lhs(self) -> complex:
        return self.det2_neumann / self.det2_dirichlet

    @property
    def rhs(self) -> complex:
        return (1.0 - self.beta) * np.exp(self.beta + self.tau)


def _sandwich(op: DiskModeOperator, W: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Symmetrized u W v, similar to diag(u) W diag(v)."""
    s = np.sqrt(op.measure)
    return (s * u)[:, None] * W * (v / s)[None, :]


def mode_determinants(V: Potential, z, m: int, rule: Optional[QuadratureRule] = None):
    """(det_2(I + u g^N v), det_2(I + u g^D v)) in mode m."""
    rule = rule if rule is not None else disk_rule(V)
    op = disk_mode_operator(m, z, rule)
    u, v = V.factors(rule.nodes)
    return det_regularized(_sandwich(op, op.wN, u, v), 2), det_regularized(_sandwich(op, op.wD, u, v), 2)


def boundary_terms(op: DiskModeOperator, V: Potential):
    """
    beta_m and tau_m from the discretized perturbed Dirichlet resolvent.

    beta = <gamma_N R^D_V M_V, gamma_D R_N> as a scalar multiplier on the
    circle; tau is the mode value of the trace term
    gamma_N R^D M_V R^D_V M_V [gamma_D R^N]^*.
    """
    r = op.rule.nodes
    u, v = V.factors(r)
    Vr = u * v
    mu = op.measure
    a, b = op.boundary_row_N, op.boundary_row_D
    F = Vr * a
    system = np.eye(len(r)) + v[:, None] * op.wD * u[None, :]
    if np.linalg.cond(system) > SINGULAR_CONDITION:
        raise SpectralProximityError(f"perturbed mode resolvent is singular near z={op.z.z} (m={op.m})")
    X = linalg.solve(system, v * (op.wD @ F))
    G = F - u * X
    beta = complex(np.sum(mu * b * G))
    tau = complex(np.sum(mu * b * Vr * (op.wD @ G)))
    return beta, tau


def mode_factors(
    V: Potential,
    z,
    m_max: Optional[int] = None,
    rule: Optional[QuadratureRule] = None,
) -> List[ModeFactor]:
    rule = rule if rule is not None else disk_rule(V)
    zp = as_param(z)
    m_max = default_mmax(zp.z, V.cutoff) if m_max is None else m_max
    u, v = V.factors(rule.nodes)
    factors = []
    for m in range(m_max + 1):
        op = disk_mode_operator(m, zp, rule)
        beta, tau = boundary_terms(op, V)
        factor = ModeFactor(
            m=m,
            degeneracy=degeneracy(m),
            det2_dirichlet=det_regularized(_sandwich(op, op.wD, u, v), 2),
            det2_neumann=det_regularized(_sandwich(op, op.wN, u, v), 2),
            beta=beta,
            tau=tau,
        )
        logger.debug(f"mode {m}: lhs={factor.lhs:.12g} rhs={factor.rhs:.12g}")
        factors.append(factor)
    return factors


def _check_modes(values: List[complex], degeneracies: List[int], tol: float) -> None:
    last = degeneracies[-1] * abs(np.log(values[-1]))
    if last >= tol:
        raise ChannelTruncationError(f"mode {len(values) - 1} still contributes {last:.3e}; raise m_max", last_increment=last)


def _product(values: List[complex], degeneracies: List[int]) -> complex:
    total = 1.0 + 0.0j
    for value, deg in zip(values, degeneracies):
        total *= value ** deg
    return complex(total)


def disk_determinant_ratio(
    V: Potential,
    z,
    m_max: Optional[int] = None,
    rule: Optional[QuadratureRule] = None,
    tol: float = MODE_TOL,
) -> complex:
    """prod_m [det_2(I + u g_m^N v) / det_2(I + u g_m^D v)]^deg(m)."""
    factors = mode_factors(V, z, m_max, rule)
    degs = [f.degeneracy for f in factors]
    values = [f.lhs for f in factors]
    _check_modes(values, degs, tol)
    return _product(values, degs)


def disk_boundary_product(
    V: Potential,
    z,
    m_max: Optional[int] = None,
    rule: Optional[QuadratureRule] = None,
    tol: float = MODE_TOL,
) -> complex:
    """prod_m [(1 - beta_m) e^{beta_m + tau_m}]^deg(m)."""
    factors = mode_factors(V, z, m_max, rule)
    degs = [f.degeneracy for f in factors]
    values = [f.rhs for f in factors]
    _check_modes(values, degs, tol)
    return _product(values, degs)


def disk_identity(V: Potential, z, m_max: Optional[int] = None, rule: Optional[QuadratureRule] = None) -> Dict[str, complex]:
    """Both sides from one pass over the modes."""
    factors = mode_factors(V, z, m_max, rule)
    degs = [f.degeneracy for f in factors]
    lhs = [f.lhs for f in factors]
    rhs = [f.rhs for f in factors]
    _check_modes(lhs, degs, MODE_TOL)
    return {"lhs": _product(lhs, degs), "rhs": _product(rhs, degs), "modes": len(factors)}


# ===== ZERO CRITERION =====

def _real_zeros(func: Callable[[float], float], z_min: float, z_max: float, samples: int) -> List[float]:
    zs = np.linspace(z_min, z_max, samples)
    values = np.array([func(z) for z in zs])
    return [
        brentq(func, zs[i], zs[i + 1], xtol=1e-13)
        for i in np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]
    ]


def mode_eigenvalues(
    V: Potential,
    m: int,
    boundary: str,
    z_min: float,
    z_max: float,
    samples: int = 120,
    rule: Optional[QuadratureRule] = None,
) -> List[float]:
    """Real eigenvalues of the perturbed mode-m operator as zeros of its det_2."""
    rule = rule if rule is not None else disk_rule(V)
    pick = 1 if boundary == DIRICHLET else 0
    return _real_zeros(lambda z: mode_determinants(V, z, m, rule)[pick].real, z_min, z_max, samples)


def mirrored_zero_criterion(
    V: Potential,
    m: int,
    z_min: float,
    z_max: float,
    samples: int = 120,
    rule: Optional[QuadratureRule] = None,
) -> List[Dict[str, complex]]:
    """
    The inverse ratio det_2(Dirichlet) / det_2(Neumann) of mode m at the
    Dirichlet eigenvalues found on [z_min, z_max]; it vanishes there.
    """
    rule = rule if rule is not None else disk_rule(V)
    rows = []
    for eig in mode_eigenvalues(V, m, DIRICHLET, z_min, z_max, samples, rule):
        det_n, det_d = mode_determinants(V, eig, m, rule)
        rows.append({"z": eig, "inverse_ratio": det_d / det_n})
    return rows
