# ============================================================================
# TESTS FOR SPECIAL FUNCTIONS
# File: src/numerics/tests/test_specfun.py
# Purpose: Check the square-root branch and Bessel / Riccati-Bessel helpers
#          against mpmath
# ============================================================================
import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent.parent.parent))

import mpmath
import numpy as np
import pytest

from src.numerics.errors import DomainError
from src.numerics.specfun import (
    SpectralParam,
    bessel_jh_product,
    bessel_jy,
    hankel0_first,
    large_order,
    riccati_jhat,
    riccati_outgoing,
    riccati_yhat,
    sqrt_up,
)

mpmath.mp.dps = 30


# ===== TEST: BRANCH OF THE SQUARE ROOT =====

def test_sqrt_up_branch():
    """Nonnegative imaginary part; positive root on (0, inf)."""
    assert sqrt_up(4.0) == 2.0
    assert sqrt_up(-4.0) == pytest.approx(2j)
    for z in (1 + 1j, -1 + 1e-3j, -1 - 1e-3j, 3 - 2j):
        w = sqrt_up(z)
        assert w.imag >= 0.0
        assert w * w == pytest.approx(z, rel=1e-14)

    print("✓ test_sqrt_up_branch passed")


def test_boundary_values():
    """lambda - i0 takes the negative root, the limit of sqrt_up(lambda - i eps)."""
    plus = SpectralParam.boundary(2.0, +1)
    minus = SpectralParam.boundary(2.0, -1)
    assert plus.k == pytest.approx(np.sqrt(2.0))
    assert minus.k == pytest.approx(-np.sqrt(2.0))
    assert sqrt_up(complex(2.0, -1e-12)).real < 0
    assert SpectralParam.boundary(-1.0, -1).k == pytest.approx(1j)

    print("✓ test_boundary_values passed")


# ===== TEST: CYLINDER FUNCTIONS =====

def test_hankel0_against_mpmath():
    for x in (1e-3, 0.5, 3.0, 40.0):
        expected = complex(mpmath.hankel1(0, x))
        assert hankel0_first(x) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(DomainError):
        hankel0_first(0.0)

    print("✓ test_hankel0_against_mpmath passed")


def test_bessel_jy_against_mpmath():
    for m in (0, 1, 7, 20):
        for x in (0.3, 2.5, 15.0):
            j, y, jp, yp = bessel_jy(m, x)
            assert j == pytest.approx(float(mpmath.besselj(m, x)), rel=1e-11, abs=1e-300)
            assert y == pytest.approx(float(mpmath.bessely(m, x)), rel=1e-11)
            assert jp == pytest.approx(float(mpmath.besselj(m, x, derivative=1)), rel=1e-10, abs=1e-300)
            assert yp == pytest.approx(float(mpmath.bessely(m, x, derivative=1)), rel=1e-10)

    print("✓ test_bessel_jy_against_mpmath passed")


def test_bessel_jy_domain():
    with pytest.raises(DomainError):
        bessel_jy(-1, 1.0)
    with pytest.raises(DomainError):
        bessel_jy(61, 1.0)
    with pytest.raises(DomainError):
        bessel_jy(0, -1.0)

    print("✓ test_bessel_jy_domain passed")


# ===== TEST: RICCATI-BESSEL =====

def test_riccati_wronskian():
    """jhat yhat' - jhat' yhat = 1 on the real axis."""
    x, h = np.linspace(0.5, 12.0, 9), 1e-6
    for ell in (0, 1, 4):
        dj = (riccati_jhat(ell, x + h) - riccati_jhat(ell, x - h)) / (2 * h)
        dy = (riccati_yhat(ell, x + h) - riccati_yhat(ell, x - h)) / (2 * h)
        w = riccati_jhat(ell, x) * dy - dj * riccati_yhat(ell, x)
        assert np.allclose(w, 1.0, atol=1e-7)

    print("✓ test_riccati_wronskian passed")


def test_riccati_outgoing():
    """w_0 = e^{ix}, and w_l = i jhat - yhat on the real axis."""
    x = np.array([0.7, 2.0, 9.0])
    assert np.allclose(riccati_outgoing(0, x), np.exp(1j * x))
    for ell in (1, 3):
        assert np.allclose(riccati_outgoing(ell, x), 1j * riccati_jhat(ell, x) - riccati_yhat(ell, x), rtol=1e-12)
    # decays off the axis
    assert abs(riccati_outgoing(2, 5.0 + 5.0j)) < 1e-1

    print("✓ test_riccati_outgoing passed")


def test_large_order_product_against_mpmath():
    """J_nu(x<) H_nu(x>) from the normalized series, where scipy's factors under/overflow."""
    ray = 1.0 + 0.3j
    for nu in (20.0, 20.5, 120.5):
        for lo, hi in ((0.5, 1.5), (1e-3, 0.8), (0.7, 0.7)):
            x_lo, x_hi = lo * ray, hi * ray
            assert large_order(nu, x_hi)
            expected = complex(mpmath.besselj(nu, x_lo) * mpmath.hankel1(nu, x_hi))
            assert complex(bessel_jh_product(nu, x_lo, x_hi)) == pytest.approx(expected, rel=1e-11)
    # below the threshold the product is scipy's
    x = np.array([2.0, 5.0])
    assert not np.any(large_order(12.0, x))
    assert np.allclose(bessel_jh_product(12.0, 0.5 * x, x), [complex(mpmath.besselj(12, 0.5 * t) * mpmath.hankel1(12, t)) for t in x], rtol=1e-10)

    print("✓ test_large_order_product_against_mpmath passed")


# ===== RUN ALL TESTS =====

def run_all_tests():
    print("\n" + "=" * 70)
    print("RUNNING SPECIAL FUNCTION TESTS")
    print("=" * 70 + "\n")

    test_sqrt_up_branch()
    test_boundary_values()
    test_hankel0_against_mpmath()
    test_bessel_jy_against_mpmath()
    test_bessel_jy_domain()
    test_riccati_wronskian()
    test_riccati_outgoing()
    test_large_order_product_against_mpmath()

    print("\n" + "=" * 70)
    print("✓ ALL SPECIAL FUNCTION TESTS PASSED")
    print("=" * 70 + "\n")


if __name__ == "__main__":
    run_all_tests()
