# ============================================================================
# TESTS FOR THE ABSTRACT BIRMAN-SCHWINGER LAYER
# File: src/spectral/tests/test_abstract_bs.py
# Purpose: Eigenvalue correspondence, Weinstein-Aronszajn multiplicities and
#          the Krein trace formula on seeded matrix instances
# ============================================================================
import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent.parent.parent))

import numpy as np
import pytest

from src.numerics.detcore import ContourSpec
from src.numerics.errors import (
    DimensionError,
    EigenvalueSignal,
    HypothesisViolationError,
    ResolventSetError,
    UsageError,
)
from src.spectral.abstract_bs import (
    FactoredPerturbation,
    bs_eigen_correspondence,
    bs_kernel,
    bs_kernel_derivative,
    free_resolvent,
    global_wa_check,
    is_eigenvalue_of_H,
    krein_trace_check,
    local_wa_check,
    perturbed_resolvent,
    random_instance,
    rank_one_instance,
    spectral_shift_steps,
    wa_contour_table,
)

SEED = 20240917


# ===== TEST: FACTORIZATION =====

def test_factored_perturbation_shapes():
    with pytest.raises(DimensionError):
        FactoredPerturbation(H0=np.eye(3), A=np.ones((2, 3)), B=np.ones((2, 4)))
    fp = rank_one_instance(0.5)
    assert fp.V.shape == (2, 2)
    assert fp.is_symmetric_factorization()
    with pytest.raises(UsageError):
        random_instance(np.random.default_rng(SEED), 4, 1, "banded")

    print("✓ test_factored_perturbation_shapes passed")


def test_resolvent_formula():
    """R(z) from the Birman-Schwinger formula equals (H - z)^{-1}."""
    rng = np.random.default_rng(SEED)
    fp = random_instance(rng, 6, 2, "general")
    z = 0.3 + 8.0j
    direct = np.linalg.inv(fp.H - z * np.eye(6))
    assert np.allclose(perturbed_resolvent(fp, z), direct, atol=1e-10)

    print("✓ test_resolvent_formula passed")


def test_kernel_derivative():
    rng = np.random.default_rng(SEED + 1)
    fp = random_instance(rng, 5, 3, "normal")
    z, h = 0.2 + 3.0j, 1e-6
    fd = (bs_kernel(fp, z + h) - bs_kernel(fp, z - h)) / (2 * h)
    assert np.allclose(bs_kernel_derivative(fp, z), fd, atol=1e-7)

    print("✓ test_kernel_derivative passed")


def test_kernel_resolvent_identities():
    """K(z1) - K(z2) = -(z1 - z2) A R0(z1) R0(z2) B^* and (I - K)^{-1} = I - A R B^*."""
    for kind in ("general", "normal", "hermitian"):
        fp = random_instance(np.random.default_rng(SEED + 3), 6, 2, kind)
        z1, z2 = 0.4 + 2.0j, -1.1 + 0.7j
        Bs = fp.B.conj().T
        difference = bs_kernel(fp, z1) - bs_kernel(fp, z2)
        product = -(z1 - z2) * fp.A @ free_resolvent(fp, z1) @ free_resolvent(fp, z2) @ Bs
        assert np.allclose(difference, product, atol=1e-10)

        inverse = np.linalg.inv(np.eye(fp.rank) - bs_kernel(fp, z1))
        assert np.allclose(inverse, np.eye(fp.rank) - fp.A @ perturbed_resolvent(fp, z1) @ Bs, atol=1e-10)

    print("✓ test_kernel_resolvent_identities passed")


def test_free_resolvent_on_spectrum():
    with pytest.raises(ResolventSetError):
        free_resolvent(rank_one_instance(1.0), 1.0)

    print("✓ test_free_resolvent_on_spectrum passed")


# ===== TEST: EIGENVALUE CORRESPONDENCE =====

def test_rank_one_eigenvalue():
    """H0 = diag(1, 2), V = c e1 e1^T: 1 + c is an eigenvalue of H."""
    c = 0.5
    fp = rank_one_instance(c)
    assert is_eigenvalue_of_H(fp, 1.0 + c)
    assert not is_eigenvalue_of_H(fp, 1.25)
    with pytest.raises(EigenvalueSignal):
        perturbed_resolvent(fp, 1.0 + c)

    print("✓ test_rank_one_eigenvalue passed")


def test_eigen_correspondence_random_instances():
    """dim ker(H - lambda0) = dim ker(I - K(lambda0)) with small residuals both ways."""
    for seed in range(50):
        rng = np.random.default_rng(SEED + seed)
        fp = random_instance(rng, 6, 2, ("general", "normal", "hermitian")[seed % 3])
        eig_H0 = np.linalg.eigvals(fp.H0)
        for lambda0 in np.linalg.eigvals(fp.H):
            if np.min(np.abs(eig_H0 - lambda0)) < 1e-3:
                continue
            report = bs_eigen_correspondence(fp, lambda0, lambda0 + 10.0j)
            assert report.dims_match
            assert report.dim_ker_H >= 1
            assert report.forward_residual < 1e-8
            assert report.backward_residual < 1e-8

    print("✓ test_eigen_correspondence_random_instances passed")


def test_eigen_correspondence_needs_distinct_points():
    with pytest.raises(HypothesisViolationError):
        bs_eigen_correspondence(rank_one_instance(0.5), 1.5, 1.5)

    print("✓ test_eigen_correspondence_needs_distinct_points passed")


# ===== TEST: WEINSTEIN-ARONSZAJN =====

def test_local_wa_rank_one():
    """Around 1 + c, H gains one eigenvalue; around 1, H0 loses one."""
    c = 0.5
    fp = rank_one_instance(c)
    gained = local_wa_check(fp, 1.5, ContourSpec(center=1.5, radius=0.2))
    lost = local_wa_check(fp, 1.0, ContourSpec(center=1.0, radius=0.2))
    assert (gained.lhs, gained.rhs) == (1, 1)
    assert (lost.lhs, lost.rhs) == (-1, -1)
    with pytest.raises(HypothesisViolationError):
        local_wa_check(fp, 3.0, ContourSpec(center=1.0, radius=0.2))

    print("✓ test_local_wa_rank_one passed")


def test_wa_tables_agree():
    """Every isolated eigenvalue of H or H0 satisfies m_H - m_H0 = winding number."""
    for kind in ("general", "normal", "hermitian", "jordan"):
        for seed in range(5):
            fp = random_instance(np.random.default_rng(SEED + 100 + seed), 6, 2, kind)
            for p in (1, 2):
                for row in wa_contour_table(fp, p):
                    assert row["lhs"] == row["rhs"], (kind, p, row)

    print("✓ test_wa_tables_agree passed")


def test_global_wa_jordan_block():
    """A defective H0 eigenvalue is counted with algebraic multiplicity."""
    fp = random_instance(np.random.default_rng(SEED), 5, 1, "jordan")
    eig = np.linalg.eigvals(fp.H0)
    double = next(e for e in eig if np.sum(np.abs(eig - e) < 1e-6) == 2)
    others = np.concatenate([eig, np.linalg.eigvals(fp.H)])
    others = others[np.abs(others - double) > 1e-6]
    contour = ContourSpec(center=double, radius=0.5 * np.min(np.abs(others - double)))
    report = global_wa_check(fp, contour, p=2)
    assert report.m_H0 == 2
    assert report.passed

    print("✓ test_global_wa_jordan_block passed")


# ===== TEST: KREIN TRACE FORMULA =====

def test_spectral_shift_steps():
    steps = spectral_shift_steps(np.array([0.0, 2.0]), np.array([1.0, 3.0]))
    assert steps == [(0.0, 1.0, 1), (2.0, 3.0, 1)]

    print("✓ test_spectral_shift_steps passed")


def test_krein_trace_hermitian_instances():
    for seed in range(20):
        fp = random_instance(np.random.default_rng(SEED + 200 + seed), 6, 2, "hermitian")
        report = krein_trace_check(fp, 0.4 + 1.5j)
        assert report.trace_error < 1e-10
        assert report.derivative_error < 1e-8

    print("✓ test_krein_trace_hermitian_instances passed")


def test_krein_trace_rejects_real_z():
    fp = random_instance(np.random.default_rng(SEED), 4, 1, "hermitian")
    with pytest.raises(HypothesisViolationError):
        krein_trace_check(fp, 0.5)
    with pytest.raises(HypothesisViolationError):
        krein_trace_check(random_instance(np.random.default_rng(SEED), 4, 1, "general"), 0.5j)

    print("✓ test_krein_trace_rejects_real_z passed")


# ===== RUN ALL TESTS =====

def run_all_tests():
    print("\n" + "=" * 70)
    print("RUNNING ABSTRACT BIRMAN-SCHWINGER TESTS")
    print("=" * 70 + "\n")

    test_factored_perturbation_shapes()
    test_resolvent_formula()
    test_kernel_derivative()
    test_kernel_resolvent_identities()
    test_free_resolvent_on_spectrum()
    test_rank_one_eigenvalue()
    test_eigen_correspondence_random_instances()
    test_eigen_correspondence_needs_distinct_points()
    test_local_wa_rank_one()
    test_wa_tables_agree()
    test_global_wa_jordan_block()
    test_spectral_shift_steps()
    test_krein_trace_hermitian_instances()
    test_krein_trace_rejects_real_z()

    print("\n" + "=" * 70)
    print("✓ ALL ABSTRACT BIRMAN-SCHWINGER TESTS PASSED")
    print("=" * 70 + "\n")


if __name__ == "__main__":
    run_all_tests()
