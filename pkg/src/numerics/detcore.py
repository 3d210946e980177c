# ============================================================================
# DETERMINANT CORE
# File: src/numerics/detcore.py
# Purpose: Fredholm and regularized determinants, log-derivatives, Riesz
#          projections and argument-principle multiplicities on dense matrices
# ============================================================================

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import linalg

from src.numerics.errors import (
    ContourError,
    DimensionError,
    ResolutionError,
    SingularPointError,
    UnsupportedOrderError,
)

logger = logging.getLogger(__name__)

# ===== THRESHOLDS =====
SINGULAR_CONDITION = 1e12
INTEGER_TOLERANCE = 0.2
TRACE_INTEGER_TOLERANCE = 0.1
NILPOTENT_RELATIVE_TOL = 1e-10
MIN_CONTOUR_NODES = 16


@dataclass(frozen=True)
class ContourSpec:
    """Counterclockwise circle |zeta - center| = radius sampled at `nodes` points."""

    center: complex
    radius: float
    nodes: int = 128

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ContourError(f"Contour radius must be positive, got {self.radius}")
        if self.nodes < MIN_CONTOUR_NODES:
            raise ContourError(f"Contour needs at least {MIN_CONTOUR_NODES} nodes, got {self.nodes}")

    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.nodes) / self.nodes

    def points(self) -> np.ndarray:
        return complex(self.center) + self.radius * np.exp(1j * self.angles())

    def encloses(self, z: complex) -> bool:
        return abs(complex(z) - complex(self.center)) < self.radius


@dataclass
class LaurentData:
    """Riesz projection P, nilpotent part D = (T - lambda0) P and its order."""

    projection: np.ndarray
    nilpotent: np.ndarray
    order: Optional[int]
    multiplicity: int
    trace: complex


def as_square(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"Expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DimensionError("Matrix has non-finite entries")
    return M


# ===== DETERMINANTS =====

def det_fredholm(M) -> complex:
    """
    det(I + M) through a pivoted LU factorization.

    Args:
        M: square complex matrix

    Returns:
        det(I + M)
    """
    M = as_square(M)
    n = M.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    lu, piv = linalg.lu_factor(np.eye(n) + M, check_finite=False)
    sign = (-1.0) ** int(np.count_nonzero(piv != np.arange(n)))
    return complex(sign * np.prod(np.diag(lu)))


def det_regularized(M, p: int = 2) -> complex:
    """
    Regularized determinant det_p(I + M) for p in {1, 2}.

    det_2(I + M) = det(I + M) exp(-tr M).
    """
    if p not in (1, 2):
        raise UnsupportedOrderError(f"Regularization order must be 1 or 2, got {p}")
    M = as_square(M)
    det1 = det_fredholm(M)
    if p == 1:
        return det1
    return det1 * np.exp(-np.trace(M))


def log_det_regularized(M, p: int = 2) -> complex:
    """log det_p(I + M) as sum of log-pivots; the imaginary part is not unwrapped."""
    if p not in (1, 2):
        raise UnsupportedOrderError(f"Regularization order must be 1 or 2, got {p}")
    M = as_square(M)
    n = M.shape[0]
    if n == 0:
        return 0.0j
    lu, piv = linalg.lu_factor(np.eye(n) + M, check_finite=False)
    value = np.sum(np.log(np.diag(lu).astype(complex)))
    if np.count_nonzero(piv != np.arange(n)) % 2:
        value += 1j * np.pi
    if p == 2:
        value -= np.trace(M)
    return complex(value)


def log_derivative_det(
    L: Callable[[complex], np.ndarray],
    L_prime: Callable[[complex], np.ndarray],
    z: complex,
) -> complex:
    """
    Delta'(z)/Delta(z) for Delta(z) = det(I - L(z)).

    Args:
        L: analytic matrix family
        L_prime: its derivative
        z: evaluation point

    Returns:
        -tr((I - L(z))^{-1} L'(z))
    """
    Lz = as_square(L(z))
    Lp = as_square(L_prime(z))
    if Lz.shape != Lp.shape:
        raise DimensionError(f"L and L' disagree in shape: {Lz.shape} vs {Lp.shape}")
    A = np.eye(Lz.shape[0]) - Lz
    cond = np.linalg.cond(A) if A.size else 1.0
    if not np.isfinite(cond) or cond > SINGULAR_CONDITION:
        raise SingularPointError(f"I - L(z) is singular at z={z} (cond={cond:.3e})", condition=cond)
    return complex(-np.trace(linalg.solve(A, Lp)))


# ===== CONTOUR CALCULUS =====

def _rounded_integer(value: complex, tolerance: float, what: str) -> int:
    nearest = int(np.rint(value.real))
    if abs(value - nearest) > tolerance:
        raise ContourError(
            f"{what} = {value.real:.6f}{value.imag:+.6f}i is not within {tolerance} of an integer; "
            "move the contour away from zeros and poles",
            value=value,
        )
    return nearest


def winding_multiplicity(f: Callable[[complex], complex], contour: ContourSpec) -> int:
    """
    (1/2 pi i) \\oint f'/f dzeta by the trapezoid rule on the circle.

    f' along the circle comes from 4th-order centered differences in the angle.
    """
    theta = contour.angles()
    h = 2.0 * np.pi / (contour.nodes * 64.0)
    center = complex(contour.center)
    r = contour.radius

    def along(t: np.ndarray) -> np.ndarray:
        return np.array([f(center + r * np.exp(1j * s)) for s in t], dtype=complex)

    values = along(theta)
    if np.any(values == 0) or not np.all(np.isfinite(values)):
        raise ContourError("f vanishes or is singular on the contour")
    d_theta = (
        -along(theta + 2 * h) + 8.0 * along(theta + h) - 8.0 * along(theta - h) + along(theta - 2 * h)
    ) / (12.0 * h)
    # dzeta = i r e^{i theta} dtheta, f' dzeta = (df/dtheta) dtheta
    count = np.mean(d_theta / values) / 1j
    logger.debug(f"winding integral around {center} (r={r}): {count}")
    return _rounded_integer(complex(count), INTEGER_TOLERANCE, "winding integral")


def riesz_projection(T, contour: ContourSpec) -> LaurentData:
    """
    Riesz projection of T for the part of its spectrum inside the contour.

    Args:
        T: square matrix
        contour: circle around lambda0 = contour.center

    Returns:
        LaurentData with P, D = (T - lambda0) P, Laurent order and multiplicity
    """
    T = as_square(T)
    n = T.shape[0]
    identity = np.eye(n)
    P = np.zeros((n, n), dtype=complex)
    # P = -(1/2 pi i) \oint (T - zeta)^{-1} dzeta, dzeta = i r e^{i theta} dtheta
    for zeta in contour.points():
        shifted = T - zeta * identity
        cond = np.linalg.cond(shifted)
        if not np.isfinite(cond) or cond > SINGULAR_CONDITION:
            raise ContourError(f"T - zeta is ill-conditioned at node zeta={zeta} (cond={cond:.3e})", value=zeta)
        P -= linalg.solve(shifted, identity) * (zeta - contour.center)
    P /= contour.nodes

    trace = complex(np.trace(P))
    nearest = int(np.rint(trace.real))
    if abs(trace - nearest) > TRACE_INTEGER_TOLERANCE:
        raise ResolutionError(f"trace(P) = {trace} is not within {TRACE_INTEGER_TOLERANCE} of an integer")

    lambda0 = complex(contour.center)
    D = (T - lambda0 * identity) @ P
    threshold = NILPOTENT_RELATIVE_TOL * max(np.linalg.norm(T, "fro"), 1.0)
    order: Optional[int] = None
    power = D.copy()
    for k in range(n + 1):
        # power = D^{k+1}
        if np.linalg.norm(power, "fro") < threshold:
            order = k
            break
        power = power @ D
    if order is None:
        logger.debug("nilpotent part is not nilpotent: contour encloses several eigenvalues")
    return LaurentData(projection=P, nilpotent=D, order=order, multiplicity=nearest, trace=trace)
