# ============================================================================
# ABSTRACT BIRMAN-SCHWINGER SANDBOX
# File: src/spectral/abstract_bs.py
# Purpose: Finite-dimensional factored perturbations H = H0 + B* A, their
#          Birman-Schwinger kernels, Weinstein-Aronszajn checks and the
#          Krein trace formula at matrix scale
# ============================================================================

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from scipy import linalg

from src.numerics.detcore import (
    ContourSpec,
    det_fredholm,
    det_regularized,
    riesz_projection,
    winding_multiplicity,
)
from src.numerics.errors import (
    DimensionError,
    EigenvalueSignal,
    HypothesisViolationError,
    ResolventSetError,
    UsageError,
)

logger = logging.getLogger(__name__)

RESOLVENT_CONDITION = 1e12
EIGEN_DETECTION_RTOL = 1e-10
NULLSPACE_RTOL = 1e-9
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class FactoredPerturbation:
    """H0 (n x n) and factors A, B (k x n) with V = B^* A."""

    H0: np.ndarray
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        H0, A, B = (np.asarray(m, dtype=complex) for m in (self.H0, self.A, self.B))
        if H0.ndim != 2 or H0.shape[0] != H0.shape[1]:
            raise DimensionError(f"H0 must be square, got {H0.shape}")
        if A.ndim != 2 or B.ndim != 2 or A.shape != B.shape or A.shape[1] != H0.shape[0]:
            raise DimensionError(f"A {A.shape} and B {B.shape} must both be k x {H0.shape[0]}")
        object.__setattr__(self, "H0", H0)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.H0.shape[0]

    @property
    def rank(self) -> int:
        return self.A.shape[0]

    @property
    def V(self) -> np.ndarray:
        return self.B.conj().T @ self.A

    @property
    def H(self) -> np.ndarray:
        return self.H0 + self.V

    def is_symmetric_factorization(self, tol: float = HERMITIAN_TOL) -> bool:
        """(Af, Bg) = (Bf, Ag) for all f, g, i.e. B^* A = A^* B."""
        left = self.B.conj().T @ self.A
        right = self.A.conj().T @ self.B
        return np.linalg.norm(left - right) <= tol * max(1.0, np.linalg.norm(left))


# ===== RESOLVENTS AND KERNELS =====

def free_resolvent(fp: FactoredPerturbation, z: complex) -> np.ndarray:
    shifted = fp.H0 - z * np.eye(fp.n)
    cond = np.linalg.cond(shifted)
    if not np.isfinite(cond) or cond > RESOLVENT_CONDITION:
        raise ResolventSetError(f"z={z} is (numerically) an eigenvalue of H0 (cond={cond:.3e})")
    return linalg.inv(shifted)


def bs_kernel(fp: FactoredPerturbation, z: complex) -> np.ndarray:
    """K(z) = -A (H0 - z)^{-1} B^*."""
    return -fp.A @ free_resolvent(fp, z) @ fp.B.conj().T


def bs_kernel_derivative(fp: FactoredPerturbation, z: complex) -> np.ndarray:
    """K'(z) = -A R0(z)^2 B^*."""
    R0 = free_resolvent(fp, z)
    return -fp.A @ R0 @ R0 @ fp.B.conj().T


def perturbed_resolvent(fp: FactoredPerturbation, z: complex) -> np.ndarray:
    """
    R(z) = R0 - R0 B^* (I - K(z))^{-1} A R0.

    Raises:
        EigenvalueSignal: I - K(z) is singular, so z is an eigenvalue of H
    """
    R0 = free_resolvent(fp, z)
    K = -fp.A @ R0 @ fp.B.conj().T
    I_minus_K = np.eye(fp.rank) - K
    if is_singular_bs(K):
        raise EigenvalueSignal(f"I - K(z) is singular at z={z}: z is an eigenvalue of H", z=z)
    return R0 - R0 @ fp.B.conj().T @ linalg.solve(I_minus_K, fp.A @ R0)


def is_singular_bs(K: np.ndarray, rtol: float = EIGEN_DETECTION_RTOL) -> bool:
    """Smallest singular value of I - K below rtol * max(||K||, 1)."""
    if K.size == 0:
        return False
    smallest = np.linalg.svd(np.eye(K.shape[0]) - K, compute_uv=False)[-1]
    return smallest < rtol * max(np.linalg.norm(K, 2), 1.0)


def is_eigenvalue_of_H(fp: FactoredPerturbation, z: complex) -> bool:
    return is_singular_bs(bs_kernel(fp, z))


# ===== EIGENVECTOR CORRESPONDENCE =====

@dataclass
class EigenCorrespondenceReport:
    dim_ker_H: int
    dim_ker_K: int
    forward_residual: float
    backward_residual: float

    @property
    def dims_match(self) -> bool:
        return self.dim_ker_H == self.dim_ker_K


def _null_space(M: np.ndarray) -> np.ndarray:
    if M.size == 0:
        return np.zeros((M.shape[1], 0), dtype=complex)
    return linalg.null_space(M, rcond=NULLSPACE_RTOL)


def bs_eigen_correspondence(fp: FactoredPerturbation, lambda0: complex, z0: complex) -> EigenCorrespondenceReport:
    """
    Map ker(H - lambda0) onto ker(I - K(lambda0)) and back.

    Forward: g = (lambda0 - z0)^{-1} A f satisfies K(lambda0) g = g.
    Backward: f = -R0(lambda0) B^* g satisfies H f = lambda0 f.
    """
    if z0 == lambda0:
        raise HypothesisViolationError("z0 must differ from lambda0")
    free_resolvent(fp, z0)
    R0 = free_resolvent(fp, lambda0)
    K = -fp.A @ R0 @ fp.B.conj().T

    H_shift = fp.H - lambda0 * np.eye(fp.n)
    ker_H = _null_space(H_shift)
    I_minus_K = np.eye(fp.rank) - K
    ker_K = _null_space(I_minus_K)

    forward = 0.0
    for f in ker_H.T:
        g = fp.A @ f / (lambda0 - z0)
        forward = max(forward, np.linalg.norm(K @ g - g) / max(np.linalg.norm(g), 1e-300))
    backward = 0.0
    for g in ker_K.T:
        f = -R0 @ fp.B.conj().T @ g
        backward = max(backward, np.linalg.norm(H_shift @ f) / max(np.linalg.norm(f), 1e-300))

    report = EigenCorrespondenceReport(
        dim_ker_H=ker_H.shape[1],
        dim_ker_K=ker_K.shape[1],
        forward_residual=float(forward),
        backward_residual=float(backward),
    )
    logger.debug(f"eigen correspondence at {lambda0}: {report}")
    return report


# ===== WEINSTEIN-ARONSZAJN =====

@dataclass
class WAReport:
    lhs: int
    rhs: int
    m_H: int
    m_H0: int

    @property
    def passed(self) -> bool:
        return self.lhs == self.rhs


def _wa_lhs(fp: FactoredPerturbation, contour: ContourSpec) -> tuple:
    m_H = riesz_projection(fp.H, contour).multiplicity
    m_H0 = riesz_projection(fp.H0, contour).multiplicity
    return m_H - m_H0, m_H, m_H0


def local_wa_check(fp: FactoredPerturbation, lambda0: complex, contour: ContourSpec) -> WAReport:
    """m(lambda0, H) - m(lambda0, H0) against the winding number of det(I - K(z))."""
    if not contour.encloses(lambda0):
        raise HypothesisViolationError(f"contour around {contour.center} does not enclose {lambda0}")
    lhs, m_H, m_H0 = _wa_lhs(fp, contour)
    rhs = winding_multiplicity(lambda z: det_fredholm(-bs_kernel(fp, z)), contour)
    return WAReport(lhs=lhs, rhs=rhs, m_H=m_H, m_H0=m_H0)


def global_wa_check(fp: FactoredPerturbation, contour: ContourSpec, p: int = 2) -> WAReport:
    """As local_wa_check with the regularized determinant det_p(I - K(z))."""
    lhs, m_H, m_H0 = _wa_lhs(fp, contour)
    rhs = winding_multiplicity(lambda z: det_regularized(-bs_kernel(fp, z), p), contour)
    return WAReport(lhs=lhs, rhs=rhs, m_H=m_H, m_H0=m_H0)


def isolating_contour(
    center: complex,
    spectra: List[np.ndarray],
    nodes: int = 128,
    cluster_tol: float = 1e-6,
) -> ContourSpec:
    """Circle around `center` with radius half the distance to the nearest other eigenvalue."""
    others = np.concatenate([np.asarray(s, dtype=complex).ravel() for s in spectra])
    distances = np.abs(others - center)
    distances = distances[distances > cluster_tol]
    radius = 0.5 * float(distances.min()) if distances.size else 1.0
    return ContourSpec(center=complex(center), radius=radius, nodes=nodes)


# ===== KREIN TRACE FORMULA =====

@dataclass
class KreinTraceReport:
    lhs: complex
    rhs: complex
    derivative_fd: complex
    derivative_trace: complex
    jumps: List[tuple] = field(default_factory=list)

    @property
    def trace_error(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def derivative_error(self) -> float:
        return abs(self.derivative_fd - self.derivative_trace)


def spectral_shift_steps(eig_H0: np.ndarray, eig_H: np.ndarray) -> List[tuple]:
    """
    Piecewise-constant xi(lambda) = #{eig(H0) <= lambda} - #{eig(H) <= lambda}.

    Returns:
        [(left, right, value)] for the intervals where xi is nonzero
    """
    points = np.unique(np.concatenate([eig_H0, eig_H]))
    steps = []
    for left, right in zip(points[:-1], points[1:]):
        value = int(np.sum(eig_H0 <= left) - np.sum(eig_H <= left))
        if value != 0:
            steps.append((float(left), float(right), value))
    return steps


def krein_trace_check(fp: FactoredPerturbation, z: complex, fd_step: float = 1e-3) -> KreinTraceReport:
    """
    trace(R - R0) = -int xi(lambda) (lambda - z)^{-2} dlambda, and
    d/dz log det_2(I - K(z)) = -trace(R - R0 + R0 V R0).
    """
    if abs(complex(z).imag) == 0.0:
        raise HypothesisViolationError("krein_trace_check needs z off the real axis")
    scale = max(np.linalg.norm(fp.H0), 1.0)
    if np.linalg.norm(fp.H0 - fp.H0.conj().T) > HERMITIAN_TOL * scale:
        raise HypothesisViolationError("H0 is not Hermitian")
    if np.linalg.norm(fp.V - fp.V.conj().T) > HERMITIAN_TOL * max(np.linalg.norm(fp.V), 1.0):
        raise HypothesisViolationError("B^* A is not Hermitian")

    R0 = free_resolvent(fp, z)
    R = perturbed_resolvent(fp, z)
    lhs = complex(np.trace(R - R0))

    steps = spectral_shift_steps(np.linalg.eigvalsh(fp.H0), np.linalg.eigvalsh(fp.H))
    rhs = 0.0j
    for left, right, value in steps:
        rhs -= value * (1.0 / (left - z) - 1.0 / (right - z))

    def delta2(w: complex) -> complex:
        return det_regularized(-bs_kernel(fp, w), 2)

    h = fd_step
    d_delta = (-delta2(z + 2 * h) + 8 * delta2(z + h) - 8 * delta2(z - h) + delta2(z - 2 * h)) / (12 * h)
    derivative_fd = complex(d_delta / delta2(z))
    derivative_trace = complex(-np.trace(R - R0 + R0 @ fp.V @ R0))
    return KreinTraceReport(
        lhs=lhs, rhs=complex(rhs), derivative_fd=derivative_fd, derivative_trace=derivative_trace, jumps=steps
    )


# ===== SEEDED INSTANCES =====

def random_instance(
    rng: np.random.Generator,
    n: int,
    rank: int,
    kind: str = "general",
    scale: float = 0.5,
) -> FactoredPerturbation:
    """
    Random factored perturbation.

    Args:
        rng: numpy Generator (seeded by the caller)
        n: dimension of H0
        rank: number of rows of A and B
        kind: "general", "normal", "hermitian" or "jordan"
        scale: size of the factor entries

    Returns:
        FactoredPerturbation
    """
    def cgauss(*shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    Q, _ = np.linalg.qr(cgauss(n, n))
    if kind == "hermitian":
        H0 = Q @ np.diag(np.sort(rng.uniform(-2.0, 2.0, n))) @ Q.conj().T
        A = scale * cgauss(rank, n)
        signs = np.diag(rng.choice([-1.0, 1.0], rank))
        return FactoredPerturbation(H0=0.5 * (H0 + H0.conj().T), A=A, B=signs @ A)
    if kind == "normal":
        H0 = Q @ np.diag(rng.uniform(-2.0, 2.0, n) + 1j * rng.uniform(-1.0, 1.0, n)) @ Q.conj().T
    elif kind == "jordan":
        T = np.diag(rng.uniform(-2.0, 2.0, n).astype(complex))
        T[1, 1] = T[0, 0]
        T[0, 1] = 1.0
        H0 = Q @ T @ Q.conj().T
    elif kind == "general":
        H0 = cgauss(n, n)
    else:
        raise UsageError(f"Unknown instance kind: {kind}")
    return FactoredPerturbation(H0=H0, A=scale * cgauss(rank, n), B=scale * cgauss(rank, n))


def rank_one_instance(c: float) -> FactoredPerturbation:
    """H0 = diag(1, 2), V = c e1 e1^T."""
    e1 = np.array([[1.0, 0.0]])
    return FactoredPerturbation(H0=np.diag([1.0, 2.0]), A=c * e1, B=e1)


def wa_contour_table(
    fp: FactoredPerturbation,
    p: int,
    nodes: int = 128,
) -> List[Dict[str, complex]]:
    """One WA row per distinct eigenvalue of H and H0, each with an isolating contour."""
    eig_H = np.linalg.eigvals(fp.H)
    eig_H0 = np.linalg.eigvals(fp.H0)
    centers: List[complex] = []
    for e in np.concatenate([eig_H, eig_H0]):
        if all(abs(e - c) > 1e-6 for c in centers):
            centers.append(complex(e))
    rows = []
    for center in centers:
        contour = isolating_contour(center, [eig_H, eig_H0], nodes=nodes)
        report = global_wa_check(fp, contour, p) if p == 2 else local_wa_check(fp, center, contour)
        rows.append(
            {
                "center": center,
                "radius": contour.radius,
                "m_H": report.m_H,
                "m_H0": report.m_H0,
                "lhs": report.lhs,
                "rhs": report.rhs,
            }
        )
    return rows
