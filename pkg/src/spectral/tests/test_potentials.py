# ============================================================================
# TESTS FOR POTENTIALS
# File: src/spectral/tests/test_potentials.py
# Purpose: Library construction, tabulated input, factorization and moments
# ============================================================================
import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent.parent.parent))

import numpy as np
import pytest

from src.numerics.errors import UsageError
from src.spectral.potentials import (
    POTENTIAL_LIBRARY,
    Potential,
    build_potential,
    load_tabulated,
    radial_bump,
    square_well,
)


# ===== TEST: LIBRARY =====

def test_library_builds_every_potential():
    for name in POTENTIAL_LIBRARY:
        V = build_potential(name, {}, dimension=3)
        assert V.dimension == 3
        assert V.name == name
        assert np.all(np.isfinite(V(np.linspace(0.0, V.cutoff, 17))))

    print("✓ test_library_builds_every_potential passed")


def test_build_potential_errors():
    with pytest.raises(UsageError):
        build_potential("harmonic", {})
    with pytest.raises(UsageError):
        build_potential("square_well", {"slope": "2"})
    with pytest.raises(UsageError):
        build_potential("tabulated", {})
    with pytest.raises(UsageError):
        Potential(profile=lambda x: x, cutoff=0.0)
    with pytest.raises(UsageError):
        square_well(dimension=4)

    print("✓ test_build_potential_errors passed")


def test_params_are_parsed_as_floats():
    V = build_potential("square_well", {"depth": "2.5", "radius": "0.5"})
    assert V(np.array([0.25]))[0] == -2.5
    assert V(np.array([0.75]))[0] == 0.0
    assert V.describe()["depth"] == 2.5

    print("✓ test_params_are_parsed_as_floats passed")


def test_load_tabulated(tmp_path):
    path = tmp_path / "well.dat"
    path.write_text("# x V\n0.0 -1.0\n1.0 -3.0\n2.0 -1.0\n")
    V = load_tabulated(path)
    assert V.cutoff == 2.0
    assert V(np.array([0.5]))[0] == pytest.approx(-2.0)
    assert V(np.array([2.5]))[0] == 0.0

    bad = tmp_path / "bad.dat"
    bad.write_text("0.0 1.0 2.0\n1.0 1.0 2.0\n")
    with pytest.raises(UsageError):
        load_tabulated(bad)
    unsorted = tmp_path / "unsorted.dat"
    unsorted.write_text("1.0 1.0\n0.5 1.0\n")
    with pytest.raises(UsageError):
        load_tabulated(unsorted)


# ===== TEST: FACTORIZATION AND MOMENTS =====

def test_factors_multiply_to_potential():
    V = square_well(depth=2.0, radius=1.0).scaled(1.0 + 1.0j)
    x = np.linspace(0.0, 1.5, 31)
    u, v = V.factors(x)
    assert np.allclose(u * v, V(x))
    assert np.all(v.imag == 0.0)
    assert np.all(v.real >= 0.0)

    print("✓ test_factors_multiply_to_potential passed")


def test_volume_integral():
    """int V d^n x for V = -1 on the unit ball: -1, -pi, -4 pi / 3."""
    assert square_well(dimension=1).volume_integral() == pytest.approx(-1.0)
    assert square_well(dimension=2).volume_integral() == pytest.approx(-np.pi)
    assert square_well(dimension=3).volume_integral() == pytest.approx(-4.0 * np.pi / 3.0)
    # (1 - s^2)^2 with s = r / a integrates to a^2 / 6 against r dr
    V = radial_bump(amplitude=-3.0, radius=0.6)
    assert V.volume_integral() == pytest.approx(2.0 * np.pi * -3.0 * 0.36 / 6.0)

    print("✓ test_volume_integral passed")


def test_integrability_checks():
    """|V| = 2 on the unit ball."""
    V = square_well(depth=2.0, radius=1.0, dimension=1)
    assert V.l1_norm == pytest.approx(2.0)
    assert set(V.integrability()) == {"int_abs_V"}

    planar = V.with_dimension(2).integrability(delta=0.5)
    assert planar["int_abs_V"] == pytest.approx(2.0)
    assert planar["int_abs_V_pow"] == pytest.approx(np.sqrt(2.0), rel=1e-8)
    assert planar["int_weighted_abs_V"] == pytest.approx(1.8, rel=1e-8)

    spatial = V.with_dimension(3).integrability()
    assert spatial["int_abs_V_r2"] == pytest.approx(2.0 / 3.0)
    assert spatial["double_integral_bound"] == pytest.approx(16.0 * np.pi ** 2)

    print("✓ test_integrability_checks passed")


def test_scaled_and_with_dimension():
    V = square_well(depth=1.0, radius=1.0)
    W = V.scaled(3.0).with_dimension(2)
    assert W.dimension == 2
    assert W(np.array([0.5]))[0] == -3.0
    assert W.params["coupling"] == 3.0
    assert V.dimension == 1

    print("✓ test_scaled_and_with_dimension passed")


# ===== RUN ALL TESTS =====

def run_all_tests(tmp_dir: Path = Path("/tmp")):
    print("\n" + "=" * 70)
    print("RUNNING POTENTIAL TESTS")
    print("=" * 70 + "\n")

    test_library_builds_every_potential()
    test_build_potential_errors()
    test_params_are_parsed_as_floats()
    test_load_tabulated(tmp_dir)
    print("✓ test_load_tabulated passed")
    test_factors_multiply_to_potential()
    test_volume_integral()
    test_integrability_checks()
    test_scaled_and_with_dimension()

    print("\n" + "=" * 70)
    print("✓ ALL POTENTIAL TESTS PASSED")
    print("=" * 70 + "\n")


if __name__ == "__main__":
    run_all_tests()
