# ============================================================================
# SPECIAL FUNCTIONS
# File: src/numerics/specfun.py
# Purpose: Branch-correct square roots and the Bessel/Hankel families used by
#          the resolvent kernels
# ============================================================================

import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy import special

from src.numerics.errors import DomainError, ScaledEvaluationError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, complex, np.ndarray]

MAX_BESSEL_ORDER = 60


def sqrt_up(z: complex) -> complex:
    """
    Square root with nonnegative imaginary part.

    On (0, inf) this is the positive root, i.e. the boundary value from the
    upper half-plane.
    """
    w = np.sqrt(complex(z))
    if w.imag < 0.0 or (w.imag == 0.0 and w.real < 0.0):
        w = -w
    return w


@dataclass(frozen=True)
class SpectralParam:
    """Complex energy z together with its cached branch of z^{1/2}."""

    z: complex
    sqrt_z: complex

    @classmethod
    def from_z(cls, z: complex) -> "SpectralParam":
        z = complex(z)
        return cls(z=z, sqrt_z=sqrt_up(z))

    @classmethod
    def boundary(cls, lam: float, side: int = +1) -> "SpectralParam":
        """
        Boundary value lam + i0 (side=+1) or lam - i0 (side=-1).

        For lam > 0 the lower-side root is -sqrt(lam), the limit of
        sqrt_up(lam - i eps).
        """
        lam = float(lam)
        if lam <= 0.0 or side > 0:
            return cls.from_z(lam)
        return cls(z=complex(lam), sqrt_z=complex(-np.sqrt(lam)))

    @property
    def k(self) -> complex:
        return self.sqrt_z


def as_param(z: Union[complex, SpectralParam]) -> SpectralParam:
    if isinstance(z, SpectralParam):
        return z
    return SpectralParam.from_z(z)


# ===== CYLINDER FUNCTIONS =====

def hankel0_first(x: float) -> complex:
    """H_0^{(1)}(x) = J_0(x) + i Y_0(x) for x > 0."""
    if not np.isfinite(x) or x <= 0.0:
        raise DomainError(f"hankel0_first requires x > 0, got {x}")
    return complex(special.hankel1(0, x))


def bessel_jy(m: int, x: float) -> Tuple[float, float, float, float]:
    """
    Bessel functions of integer order and their derivatives.

    Args:
        m: nonnegative order, at most 60
        x: positive real argument

    Returns:
        (J_m(x), Y_m(x), J_m'(x), Y_m'(x))
    """
    if m < 0 or m > MAX_BESSEL_ORDER:
        raise DomainError(f"Bessel order must lie in [0, {MAX_BESSEL_ORDER}], got {m}")
    if not np.isfinite(x) or x <= 0.0:
        raise DomainError(f"bessel_jy requires x > 0, got {x}")
    j = special.jv(m, x)
    y = special.yv(m, x)
    jp = special.jvp(m, x)
    yp = special.yvp(m, x)
    values = (float(j), float(y), float(jp), float(yp))
    if not all(np.isfinite(v) for v in values):
        raise ScaledEvaluationError(
            f"Bessel evaluation overflowed for m={m}, x={x:.3e}; increase x or lower m"
        )
    return values


def cylinder_j(m: int, x: ArrayLike) -> np.ndarray:
    return special.jv(m, x)


def cylinder_y(m: int, x: ArrayLike) -> np.ndarray:
    return special.yv(m, x)


def cylinder_h1(m: int, x: ArrayLike) -> np.ndarray:
    return special.hankel1(m, x)


# ===== RICCATI-BESSEL FUNCTIONS =====
# jhat(x) = x j_l(x), yhat(x) = x y_l(x), w(x) = i x h_l^{(1)}(x) = i jhat - yhat.

def riccati_jhat(ell: int, x: ArrayLike) -> np.ndarray:
    x = np.asarray(x)
    return x * special.spherical_jn(ell, x)


def riccati_yhat(ell: int, x: ArrayLike) -> np.ndarray:
    x = np.asarray(x)
    return x * special.spherical_yn(ell, x)


def riccati_outgoing(ell: int, x: ArrayLike) -> np.ndarray:
    """i x h_l^{(1)}(x); equals e^{ix} for l = 0."""
    x = np.asarray(x, dtype=complex)
    if ell == 0:
        return np.exp(1j * x)
    # Hankel form; i*jhat - yhat cancels badly off the real axis
    return 1j * np.sqrt(np.pi * x / 2.0) * special.hankel1(ell + 0.5, x)


# ===== LARGE-ORDER PRODUCTS =====
# For nu > 4|x| + 10, J_nu(x) = (x/2)^nu / Gamma(nu + 1) * Jn(x) and
# Y_nu(x) = -Gamma(nu) (x/2)^{-nu} / pi * Yn(x) with normalized series Jn, Yn -> 1.

SCALED_ORDER_MARGIN = 10.0
SERIES_TERMS = 200


def large_order(nu: float, x: ArrayLike) -> np.ndarray:
    return nu > 4.0 * np.abs(x) + SCALED_ORDER_MARGIN


def _normalized_series(x: np.ndarray, ratio, terms: int) -> np.ndarray:
    quarter = np.asarray(x, dtype=complex) ** 2 / 4.0
    term = np.ones_like(quarter)
    total = term.copy()
    for j in range(terms):
        term = term * quarter * ratio(j)
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total


def _j_normalized(nu: float, x: np.ndarray) -> np.ndarray:
    return _normalized_series(x, lambda j: -1.0 / ((j + 1) * (nu + j + 1)), SERIES_TERMS)


def _y_normalized(nu: float, x: np.ndarray) -> np.ndarray:
    # finite for integer nu; past j = nu - 1 the terms are below rounding here
    terms = min(SERIES_TERMS, int(np.ceil(nu)) - 1)
    return _normalized_series(x, lambda j: 1.0 / ((j + 1) * (nu - j - 1)), terms)


def bessel_jh_product(nu: float, x_lo: ArrayLike, x_hi: ArrayLike) -> np.ndarray:
    """
    J_nu(x_lo) H_nu^{(1)}(x_hi) for x_lo, x_hi on a common ray with |x_lo| <= |x_hi|.

    Where the order dominates the argument the product is assembled from
    (x_lo / x_hi)^nu and the normalized series, so neither factor underflows
    or overflows on its own; elsewhere scipy's functions are multiplied.
    """
    x_lo, x_hi = np.broadcast_arrays(np.asarray(x_lo, dtype=complex), np.asarray(x_hi, dtype=complex))
    shape = x_lo.shape
    x_lo, x_hi = x_lo.ravel(), x_hi.ravel()
    out = np.empty(x_lo.shape, dtype=complex)
    scaled = large_order(nu, x_hi)
    direct = ~scaled
    if np.any(direct):
        out[direct] = special.jv(nu, x_lo[direct]) * special.hankel1(nu, x_hi[direct])
    if np.any(scaled):
        lo, hi = x_lo[scaled], x_hi[scaled]
        j_lo = _j_normalized(nu, lo)
        with np.errstate(divide="ignore", under="ignore", invalid="ignore"):
            ratio = np.where(hi == 0, 0.0, (lo / np.where(hi == 0, 1.0, hi)).real) ** nu
            jj = np.exp(nu * np.log(lo * hi / 4.0) - 2.0 * special.gammaln(nu + 1.0))
        jj = np.where(np.isfinite(jj), jj, 0.0) * j_lo * _j_normalized(nu, hi)
        jy = -ratio * j_lo * _y_normalized(nu, hi) / (np.pi * nu)
        out[scaled] = jj + 1j * jy
    return out.reshape(shape)
