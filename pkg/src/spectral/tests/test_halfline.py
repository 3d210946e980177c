# ============================================================================
# TESTS FOR THE HALF-LINE LAYER
# File: src/spectral/tests/test_halfline.py
# Purpose: Jost solutions, Dirichlet/Neumann Birman-Schwinger determinants,
#          m-functions and bound states on compactly supported potentials
# ============================================================================
import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent.parent.parent))

import numpy as np
import pytest

from src.numerics.errors import DirichletEigenvalueSignal
from src.numerics.quadrature import nystrom_refinement
from src.spectral.halfline import (
    boundary_ratio_formula,
    bs_operator,
    det_dirichlet,
    det_neumann,
    dirichlet_eigenvalues,
    jost_as_sampled,
    jost_solution,
    krein_1d_check,
    mfunctions,
    neumann_eigenvalues,
    regular_solutions,
    symmetrized_determinant_check,
    wronskian,
)
from src.spectral.oracles import (
    dirichlet_eigenvalues_by_shooting,
    jost_by_shooting,
    zero_energy_node_count,
)
from src.spectral.potentials import gaussian_bump, square_well, truncated_exponential, zero_potential

WELL = square_well(depth=2.0, radius=1.0)
Z_GRID = np.linspace(-5.0, -0.1, 20)


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


# ===== TEST: JOST SOLUTIONS =====

def test_jost_solution_against_shooting():
    """Volterra marching reproduces the ODE oracle at real and complex z."""
    for V in (WELL, gaussian_bump(), truncated_exponential(amplitude=1.5)):
        for z in (-3.0, -0.5 + 0.7j, 2.0 + 0.5j):
            js = jost_solution(V, z)
            f0, fp0 = jost_by_shooting(V, z)
            assert _rel(js.f0, f0) < 1e-8
            assert _rel(js.fprime0, fp0) < 1e-8

    print("✓ test_jost_solution_against_shooting passed")


def _square_well_jost(depth: float, radius: float, z: complex):
    """Closed-form (f(z, 0), f'(z, 0)) for V = -depth on [0, radius]."""
    k = np.sqrt(complex(z))
    if k.imag < 0:
        k = -k
    kappa = np.sqrt(complex(z) + depth)
    phase = np.exp(1j * k * radius)
    f0 = phase * (np.cos(kappa * radius) - 1j * k * np.sin(kappa * radius) / kappa)
    fp0 = phase * (kappa * np.sin(kappa * radius) + 1j * k * np.cos(kappa * radius))
    return f0, fp0


def test_jost_derivative_closed_form():
    """f'(z, 0) from both Volterra solvers matches the square-well closed form."""
    for z in (-3.0, -0.5 + 0.7j, 2.0 + 0.5j):
        f0, fp0 = _square_well_jost(2.0, 1.0, z)
        for method in ("march", "picard"):
            js = jost_solution(WELL, z, grid_size=512, method=method)
            assert _rel(js.f0, f0) < 1e-9
            assert _rel(js.fprime0, fp0) < 1e-9

    print("✓ test_jost_derivative_closed_form passed")


def test_picard_matches_marching():
    march = jost_solution(WELL, -1.0, grid_size=512)
    picard = jost_solution(WELL, -1.0, grid_size=512, method="picard")
    assert _rel(picard.f0, march.f0) < 1e-9

    print("✓ test_picard_matches_marching passed")


def test_free_jost_solution():
    """V = 0 gives f = e^{ikx}, so f(0) = 1 and f'(0) = ik."""
    js = jost_solution(zero_potential(), -4.0, grid_size=64)
    assert js.f0 == pytest.approx(1.0)
    assert js.fprime0 == pytest.approx(-2.0)

    print("✓ test_free_jost_solution passed")


def test_wronskians():
    """W(phi, theta) = -1 and W(f, phi) = f(0) along the whole grid."""
    z = -1.5 + 0.3j
    phi, theta = regular_solutions(WELL, z, grid_size=1024)
    js = jost_solution(WELL, z, grid_size=1024)
    assert np.allclose(wronskian(phi, theta), -1.0, atol=1e-8)
    assert np.allclose(wronskian(jost_as_sampled(js), phi), js.f0, atol=1e-8)

    print("✓ test_wronskians passed")


# ===== TEST: JOST-PAIS REDUCTION =====

def test_dirichlet_determinant_is_jost_function():
    """det(I + u G_D v) = f(z, 0) at 512 nodes on the default grid."""
    rule = WELL.rule(512)
    for z in Z_GRID:
        f0, _ = jost_by_shooting(WELL, z)
        assert _rel(det_dirichlet(WELL, z, rule), f0) < 1e-7

    print("✓ test_dirichlet_determinant_is_jost_function passed")


def test_neumann_determinant_is_scaled_derivative():
    """det(I + u G_N v) = f'(z, 0) / (i sqrt z)."""
    rule = WELL.rule(512)
    for z in Z_GRID:
        _, fp0 = jost_by_shooting(WELL, z)
        k = 1j * np.sqrt(-z)
        assert _rel(det_neumann(WELL, z, rule), fp0 / (1j * k)) < 1e-7

    print("✓ test_neumann_determinant_is_scaled_derivative passed")


def test_complex_potential_and_energy():
    """The reduction holds off the real axis and for complex V."""
    V = gaussian_bump(amplitude=-1.0, width=0.5, cutoff=4.0)
    Vc = V.scaled(1.0 + 0.5j)
    z = 1.5 + 0.4j
    rule = Vc.rule(512)
    f0, fp0 = jost_by_shooting(Vc, z)
    assert _rel(det_dirichlet(Vc, z, rule), f0) < 1e-7
    k = np.sqrt(complex(z))
    assert _rel(det_neumann(Vc, z, rule), fp0 / (1j * k)) < 1e-7

    print("✓ test_complex_potential_and_energy passed")


def test_three_way_ratio():
    """det_N / det_D, the boundary integral and m_D / m_0D agree."""
    for z in Z_GRID[::4]:
        ratio = det_neumann(WELL, z) / det_dirichlet(WELL, z)
        boundary = boundary_ratio_formula(WELL, z)
        m = mfunctions(WELL, z)
        assert _rel(ratio, boundary) < 1e-7
        assert _rel(ratio, m.mD / m.m0D) < 1e-7
        assert m.mD * m.mN == pytest.approx(-1.0)
        assert m.m0D * m.m0N == pytest.approx(-1.0)

    print("✓ test_three_way_ratio passed")


def test_nystrom_increments():
    """Doubling the node count from 256 changes det_D by less than 1e-8."""
    history = nystrom_refinement(lambda n: bs_operator(WELL, -2.0, "dirichlet", WELL.rule(n)), [256, 512], p=1)
    assert history[-1][2] < 1e-8

    print("✓ test_nystrom_increments passed")


def test_symmetrized_determinant():
    """det(I + U G V) = det(I + G^{1/2} V G^{1/2}) for z < 0."""
    result = symmetrized_determinant_check(WELL, -1.0)
    assert _rel(result["symmetrized"], result["direct"]) < 1e-10

    print("✓ test_symmetrized_determinant passed")


# ===== TEST: RANK-ONE RESOLVENT DIFFERENCE =====

def test_krein_1d_identity():
    """G_D - G_N = -i z^{-1/2} e^{i sqrt z (x + x')} on random pairs."""
    rng = np.random.default_rng(20240917)
    x = rng.uniform(0.0, 3.0, 1000)
    xp = rng.uniform(0.0, 3.0, 1000)
    for z in (-2.0, -0.5 + 1.0j, 3.0 + 0.2j):
        check = krein_1d_check(z, x, xp)
        assert np.max(np.abs(check["lhs"] - check["rhs"])) < 1e-12

    print("✓ test_krein_1d_identity passed")


# ===== TEST: BOUND STATES =====

def test_bound_state_counts():
    """Zeros of det_D, ODE shooting and the zero-energy node count agree."""
    for depth, count in [(1.0, 0), (4.0, 1), (30.0, 2)]:
        V = square_well(depth=depth, radius=1.0)
        eigenvalues = dirichlet_eigenvalues(V)
        assert len(eigenvalues) == count
        assert zero_energy_node_count(V) == count
        shooting = dirichlet_eigenvalues_by_shooting(V, -depth)
        assert np.allclose(sorted(eigenvalues), sorted(shooting), atol=1e-6)

    print("✓ test_bound_state_counts passed")


def test_neumann_eigenvalues_interlace():
    """The Neumann ground state lies below the Dirichlet one."""
    V = square_well(depth=4.0, radius=1.0)
    dirichlet = dirichlet_eigenvalues(V)
    neumann = neumann_eigenvalues(V)
    assert neumann and dirichlet
    assert min(neumann) < min(dirichlet)

    print("✓ test_neumann_eigenvalues_interlace passed")


def test_psi_guard_at_dirichlet_eigenvalue():
    V = square_well(depth=4.0, radius=1.0)
    (eigenvalue,) = dirichlet_eigenvalues(V)
    with pytest.raises(DirichletEigenvalueSignal):
        boundary_ratio_formula(V, eigenvalue)

    print("✓ test_psi_guard_at_dirichlet_eigenvalue passed")


# ===== RUN ALL TESTS =====

def run_all_tests():
    print("\n" + "=" * 70)
    print("RUNNING HALF-LINE TESTS")
    print("=" * 70 + "\n")

    test_jost_solution_against_shooting()
    test_jost_derivative_closed_form()
    test_picard_matches_marching()
    test_free_jost_solution()
    test_wronskians()
    test_dirichlet_determinant_is_jost_function()
    test_neumann_determinant_is_scaled_derivative()
    test_complex_potential_and_energy()
    test_three_way_ratio()
    test_nystrom_increments()
    test_symmetrized_determinant()
    test_krein_1d_identity()
    test_bound_state_counts()
    test_neumann_eigenvalues_interlace()
    test_psi_guard_at_dirichlet_eigenvalue()

    print("\n" + "=" * 70)
    print("✓ ALL HALF-LINE TESTS PASSED")
    print("=" * 70 + "\n")


if __name__ == "__main__":
    run_all_tests()
