# ============================================================================
# POTENTIALS
# File: src/spectral/potentials.py
# Purpose: Compactly supported potentials (half-line and radial) and the
#          built-in potential library used by the CLI
# ============================================================================

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Tuple, Union

import numpy as np

from src.numerics.errors import UsageError
from src.numerics.quadrature import QuadratureRule, rule_for_support

logger = logging.getLogger(__name__)

Profile = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Potential:
    """
    Potential V supported on [0, cutoff] (closed: V(cutoff) is the inner value).

    Args:
        profile: vectorized x -> V(x), only evaluated on [0, cutoff]
        cutoff: support edge a, V = 0 beyond it
        dimension: 1 for the half-line, 2 or 3 for radial problems
        name: library name echoed in output
        params: parameterization echoed in output
        breakpoints: interior points where V jumps
    """

    profile: Profile
    cutoff: float
    dimension: int = 1
    name: str = "custom"
    params: Dict[str, Any] = field(default_factory=dict)
    breakpoints: Tuple[float, ...] = ()

    def __post_init__(self):
        if not self.cutoff > 0:
            raise UsageError(f"Potential cutoff must be positive, got {self.cutoff}")
        if self.dimension not in (1, 2, 3):
            raise UsageError(f"Dimension must be 1, 2 or 3, got {self.dimension}")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = (x >= 0.0) & (x <= self.cutoff)
        values = np.zeros(x.shape, dtype=np.result_type(float, self._sample_dtype()))
        if np.any(inside):
            values[inside] = np.asarray(self.profile(x[inside]))
        return values

    def _sample_dtype(self):
        return np.asarray(self.profile(np.array([0.5 * self.cutoff]))).dtype

    def sample_for_trapezoid(self, grid: np.ndarray) -> np.ndarray:
        """V on a grid, with one-sided averages at interior breakpoints."""
        values = self(grid).astype(complex)
        eps = 1e-12 * self.cutoff
        for b in self.breakpoints:
            hit = np.isclose(grid, b, rtol=0.0, atol=1e-14 * self.cutoff)
            if np.any(hit):
                values[hit] = 0.5 * (self(np.array([b - eps]))[0] + self(np.array([b + eps]))[0])
        return values

    def factors(self, x) -> Tuple[np.ndarray, np.ndarray]:
        """u = e^{i arg V} |V|^{1/2}, v = |V|^{1/2} with V = u v."""
        V = np.asarray(self(x), dtype=complex)
        v = np.sqrt(np.abs(V))
        phase = np.where(np.abs(V) > 0, V / np.where(np.abs(V) > 0, np.abs(V), 1.0), 0.0)
        return phase * v, v.astype(complex)

    def max_abs(self) -> float:
        grid = np.linspace(0.0, self.cutoff, 2049)
        return float(np.max(np.abs(self(grid))))

    def radial_moment(self, power: int, order: int = 64) -> complex:
        """int_0^a V(r) r^power dr by composite Gauss-Legendre."""
        rule = self.rule(order * 4, n_per_panel=order)
        return complex(np.sum(rule.weights * self(rule.nodes) * rule.nodes ** power))

    @property
    def l1_norm(self) -> float:
        rule = self.rule(256)
        return float(np.sum(rule.weights * np.abs(self(rule.nodes))))

    def volume_integral(self) -> complex:
        """int V d^n x for the radial extension of V to R^n (n = 1: the half-line)."""
        if self.dimension == 1:
            return self.radial_moment(0)
        if self.dimension == 2:
            return 2.0 * np.pi * self.radial_moment(1)
        return 4.0 * np.pi * self.radial_moment(2)

    def integrability(self, delta: float = 0.5) -> Dict[str, float]:
        """Integrals that certify the decay classes for n = 2 (delta > 0) and n = 3."""
        rule = self.rule(256)
        r, w = rule.nodes, rule.weights
        absV = np.abs(self(r))
        checks = {"int_abs_V": self.l1_norm}
        if self.dimension == 2:
            checks["int_abs_V_pow"] = float(np.sum(w * absV ** (1.0 + delta) * r))
            checks["int_weighted_abs_V"] = float(np.sum(w * (1.0 + r ** delta) * absV * r))
        elif self.dimension == 3:
            checks["int_abs_V_r2"] = float(np.sum(w * absV * r ** 2))
            # int int |V(x)||V(y)| |x - y|^{-2} over R^3 x R^3, bounded via the radial majorant
            checks["double_integral_bound"] = float((4.0 * np.pi) ** 2 * np.sum(w * absV * r) ** 2)
        return checks

    def rule(self, nodes: int, n_per_panel: int = 16) -> QuadratureRule:
        return rule_for_support(self.cutoff, nodes, n_per_panel, self.breakpoints)

    def with_dimension(self, dimension: int) -> "Potential":
        return Potential(
            profile=self.profile,
            cutoff=self.cutoff,
            dimension=dimension,
            name=self.name,
            params=dict(self.params),
            breakpoints=self.breakpoints,
        )

    def scaled(self, coupling: float) -> "Potential":
        params = dict(self.params)
        params["coupling"] = params.get("coupling", 1.0) * coupling
        profile = self.profile
        return Potential(
            profile=lambda x: coupling * profile(x),
            cutoff=self.cutoff,
            dimension=self.dimension,
            name=self.name,
            params=params,
            breakpoints=self.breakpoints,
        )

    def describe(self) -> Dict[str, Any]:
        return {"name": self.name, "dimension": self.dimension, "cutoff": self.cutoff, **self.params}


# ===== BUILT-IN LIBRARY =====

def zero_potential(cutoff: float = 1.0, dimension: int = 1) -> Potential:
    return Potential(
        profile=lambda x: np.zeros_like(x),
        cutoff=cutoff,
        dimension=dimension,
        name="zero",
        params={"cutoff": cutoff},
    )


def square_well(depth: float = 1.0, radius: float = 1.0, dimension: int = 1) -> Potential:
    """V = -depth on [0, radius]."""
    return Potential(
        profile=lambda x: np.full_like(x, -depth),
        cutoff=radius,
        dimension=dimension,
        name="square_well",
        params={"depth": depth, "radius": radius},
    )


def square_barrier(height: float = 1.0, radius: float = 1.0, dimension: int = 1) -> Potential:
    """V = +height on [0, radius]."""
    return Potential(
        profile=lambda x: np.full_like(x, height),
        cutoff=radius,
        dimension=dimension,
        name="square_barrier",
        params={"height": height, "radius": radius},
    )


def gaussian_bump(amplitude: float = -1.0, width: float = 0.5, cutoff: float = 4.0, dimension: int = 1) -> Potential:
    """V = amplitude exp(-x^2 / (2 width^2)), truncated at cutoff."""
    return Potential(
        profile=lambda x: amplitude * np.exp(-0.5 * (x / width) ** 2),
        cutoff=cutoff,
        dimension=dimension,
        name="gaussian",
        params={"amplitude": amplitude, "width": width, "cutoff": cutoff},
    )


def truncated_exponential(amplitude: float = -1.0, rate: float = 1.0, cutoff: float = 3.0, dimension: int = 1) -> Potential:
    """V = amplitude exp(-rate x) on [0, cutoff]."""
    return Potential(
        profile=lambda x: amplitude * np.exp(-rate * x),
        cutoff=cutoff,
        dimension=dimension,
        name="exponential",
        params={"amplitude": amplitude, "rate": rate, "cutoff": cutoff},
    )


def radial_bump(amplitude: float = -3.0, radius: float = 0.6, dimension: int = 2) -> Potential:
    """V = amplitude (1 - (r/radius)^2)^2 on [0, radius]; |V|^{1/2} is a polynomial."""
    return Potential(
        profile=lambda r: amplitude * (1.0 - (r / radius) ** 2) ** 2,
        cutoff=radius,
        dimension=dimension,
        name="radial_bump",
        params={"amplitude": amplitude, "radius": radius},
    )


def load_tabulated(path: Union[str, Path], dimension: int = 1) -> Potential:
    """
    Potential from a two-column (x, V) text file with '#' comments.

    Values are linearly interpolated; the cutoff is the last abscissa.
    """
    table = np.loadtxt(path, comments="#", ndmin=2)
    if table.shape[1] != 2 or table.shape[0] < 2:
        raise UsageError(f"{path}: expected two columns and at least two rows")
    x, V = table[:, 0], table[:, 1]
    if np.any(np.diff(x) <= 0) or x[0] < 0:
        raise UsageError(f"{path}: abscissae must be nonnegative and strictly increasing")
    logger.info(f"Loaded tabulated potential from {path} ({len(x)} rows)")
    return Potential(
        profile=lambda r: np.interp(r, x, V),
        cutoff=float(x[-1]),
        dimension=dimension,
        name="tabulated",
        params={"path": str(path)},
    )


POTENTIAL_LIBRARY: Dict[str, Callable[..., Potential]] = {
    "zero": zero_potential,
    "square_well": square_well,
    "square_barrier": square_barrier,
    "gaussian": gaussian_bump,
    "exponential": truncated_exponential,
    "radial_bump": radial_bump,
}


def build_potential(name: str, params: Dict[str, Any], dimension: int = 1) -> Potential:
    """
    Instantiate a library potential by name.

    Args:
        name: library key or "tabulated" (params["path"] required)
        params: keyword parameters of the constructor
        dimension: 1, 2 or 3

    Returns:
        Potential
    """
    if name == "tabulated":
        if "path" not in params:
            raise UsageError("tabulated potential needs --param path=FILE")
        return load_tabulated(params["path"], dimension=dimension)
    if name not in POTENTIAL_LIBRARY:
        raise UsageError(f"Unknown potential {name!r}; choose from {sorted(POTENTIAL_LIBRARY)} or 'tabulated'")
    try:
        return POTENTIAL_LIBRARY[name](dimension=dimension, **{k: float(v) for k, v in params.items()})
    except TypeError as e:
        raise UsageError(f"Bad parameters for potential {name!r}: {e}") from e
