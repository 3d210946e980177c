# ============================================================================
# COMMAND SUITES
# File: src/orchestrator/commands.py
# Purpose: Per-command defaults, work units and checked deviation columns
# ============================================================================

import logging
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from src.config import Settings
from src.numerics.errors import UsageError
from src.numerics.quadrature import rule_for_support
from src.numerics.specfun import SpectralParam
from src.orchestrator.pipeline_state import RunConfig
from src.spectral import abstract_bs, disk_domain, halfline, oracles, scattering
from src.spectral.potentials import Potential, build_potential

logger = logging.getLogger(__name__)

Row = Dict[str, Any]


@dataclass
class SuiteContext:
    """Everything a work unit needs; shared read-only across worker threads."""

    config: RunConfig
    settings: Settings
    potential: Optional[Potential]

    def rule(self, nodes: Optional[int] = None):
        V = self.potential
        nodes = nodes if nodes is not None else self.config.nodes
        if self.config.panels:
            n_per_panel = max(2, nodes // self.config.panels)
        else:
            n_per_panel = self.settings.panel_order
        return rule_for_support(V.cutoff, nodes, n_per_panel, V.breakpoints)


@dataclass
class CommandSpec:
    """
    Args:
        name: command name
        defaults: RunConfig field defaults for this command
        checks: deviation column -> tolerance
        grid: "z", "lambda" or "instances"
        point: work unit evaluated per grid point (thread-safe)
        batch: optional whole-grid evaluation (for grid-sequential suites)
    """

    name: str
    defaults: Dict[str, Any]
    checks: Dict[str, float]
    grid: str
    point: Optional[Callable[[Any, SuiteContext], Row]] = None
    batch: Optional[Callable[[List[float], SuiteContext], List[Row]]] = None
    needs_potential: bool = True


# ===== HELPERS =====

def _rel(a: complex, b: complex) -> float:
    return float(abs(a - b) / max(abs(b), 1e-300))


def _z(value: float, ctx: SuiteContext) -> complex:
    return complex(value, ctx.config.z_imag)


# ===== HALF-LINE SUITES =====

def jost_point(z_real: float, ctx: SuiteContext) -> Row:
    z = _z(z_real, ctx)
    V = ctx.potential
    rule = ctx.rule()
    k = SpectralParam.from_z(z).sqrt_z
    js = halfline.jost_solution(V, z)
    f0, fp0 = oracles.jost_by_shooting(V, z)
    det_d = halfline.det_dirichlet(V, z, rule)
    det_n = halfline.det_neumann(V, z, rule)
    return {
        "z": z,
        "det_D": det_d,
        "det_N": det_n,
        "jost_f0": js.f0,
        "jost_fp0_over_ik": js.fprime0 / (1j * k),
        "oracle_f0": f0,
        "oracle_fp0_over_ik": fp0 / (1j * k),
        "dev_D": _rel(det_d, f0),
        "dev_N": _rel(det_n, fp0 / (1j * k)),
        "dev_marching": _rel(js.f0, f0),
    }


def det1d_point(z_real: float, ctx: SuiteContext) -> Row:
    z = _z(z_real, ctx)
    V = ctx.potential
    p = ctx.config.p
    n = ctx.config.nodes
    coarse, fine = ctx.rule(n), ctx.rule(2 * n)
    d_n = halfline.bs_operator(V, z, "dirichlet", coarse).determinant(p)
    d_2n = halfline.bs_operator(V, z, "dirichlet", fine).determinant(p)
    n_n = halfline.bs_operator(V, z, "neumann", coarse).determinant(p)
    n_2n = halfline.bs_operator(V, z, "neumann", fine).determinant(p)
    return {
        "z": z,
        "nodes": n,
        "det_D_n": d_n,
        "det_D_2n": d_2n,
        "det_N_n": n_n,
        "det_N_2n": n_2n,
        "increment_D": float(abs(d_2n - d_n)),
        "increment_N": float(abs(n_2n - n_n)),
    }


def ratio1d_point(z_real: float, ctx: SuiteContext) -> Row:
    z = _z(z_real, ctx)
    V = ctx.potential
    rule = ctx.rule()
    det_ratio = halfline.det_neumann(V, z, rule) / halfline.det_dirichlet(V, z, rule)
    mf = halfline.mfunctions(V, z)
    m_ratio = mf.mD / mf.m0D
    formula = halfline.boundary_ratio_formula(V, z)
    return {
        "z": z,
        "det_ratio": det_ratio,
        "m_ratio": m_ratio,
        "boundary_formula": formula,
        "dev_det_m": _rel(det_ratio, m_ratio),
        "dev_det_formula": _rel(det_ratio, formula),
        "dev_m_formula": _rel(m_ratio, formula),
    }


def sweep_point(z_real: float, ctx: SuiteContext) -> Row:
    z = _z(z_real, ctx)
    V = ctx.potential
    rule = ctx.rule()
    k = SpectralParam.from_z(z).sqrt_z
    det_d = halfline.det_dirichlet(V, z, rule)
    det_n = halfline.det_neumann(V, z, rule)
    js = halfline.jost_solution(V, z)
    return {
        "z": z,
        "det_D": det_d,
        "det_N": det_n,
        "det_product": det_d * det_n,
        "jost_f0": js.f0,
        "jost_fp0": js.fprime0,
        "dev_D": _rel(det_d, js.f0),
        "dev_N": _rel(det_n, js.fprime0 / (1j * k)),
    }


# ===== MATRIX-MODEL SUITE =====

WA_KINDS = ("general", "normal", "hermitian", "jordan")


def wa_point(index: int, ctx: SuiteContext) -> List[Row]:
    seed = ctx.config.seed + index
    rng = np.random.default_rng(seed)
    kind = WA_KINDS[index % len(WA_KINDS)]
    fp = abstract_bs.random_instance(rng, n=6, rank=2, kind=kind)
    rows_p1 = abstract_bs.wa_contour_table(fp, 1, nodes=ctx.settings.contour_nodes)
    rows_p2 = abstract_bs.wa_contour_table(fp, 2, nodes=ctx.settings.contour_nodes)
    rows = []
    for r1, r2 in zip(rows_p1, rows_p2):
        rows.append(
            {
                "instance": index,
                "seed": seed,
                "kind": kind,
                "center": r1["center"],
                "radius": r1["radius"],
                "m_H": r1["m_H"],
                "m_H0": r1["m_H0"],
                "lhs": r1["lhs"],
                "rhs_p1": r1["rhs"],
                "rhs_p2": r2["rhs"],
                "mismatch": abs(r1["lhs"] - r1["rhs"]) + abs(r2["lhs"] - r2["rhs"]),
            }
        )
    return rows


# ===== SCATTERING SUITES =====

def _ssf_rows(lams: List[float], ctx: SuiteContext) -> List[scattering.SSFResult]:
    return scattering.spectral_shift_sweep(
        ctx.potential, lams, l_max=ctx.config.lmax, rule=ctx.rule(), boundary_eps=ctx.config.boundary_eps
    )


def ssf_batch(lams: List[float], ctx: SuiteContext) -> List[Row]:
    rows = []
    for result in _ssf_rows(lams, ctx):
        oracle = scattering.oracle_spectral_shift(ctx.potential, result.lam, ctx.config.lmax)
        rows.append(
            {
                "lambda": result.lam,
                "xi": result.xi,
                "xi_oracle": oracle,
                "correction": result.correction,
                "det2_plus": result.det2_plus,
                "det2_minus": result.det2_minus,
                "dev_xi": abs(result.xi - oracle),
            }
        )
    return rows


def sdet_batch(lams: List[float], ctx: SuiteContext) -> List[Row]:
    V = ctx.potential
    rows = []
    for result in _ssf_rows(lams, ctx):
        det_s = scattering.scattering_det(V, result.lam, l_max=ctx.config.lmax, rule=ctx.rule())
        oracle = scattering.oracle_scattering_det(V, result.lam, ctx.config.lmax)
        from_xi = np.exp(-2j * np.pi * result.xi)
        rows.append(
            {
                "lambda": result.lam,
                "det_S": det_s,
                "exp_xi": complex(from_xi),
                "det_S_oracle": oracle,
                "unitarity_dev": abs(abs(det_s) - 1.0),
                "dev_xi": float(abs(det_s - from_xi)),
                "dev_oracle": float(abs(det_s - oracle)),
            }
        )
    return rows


# ===== DISK SUITE =====

def disk_point(z_real: float, ctx: SuiteContext) -> Row:
    z = _z(z_real, ctx)
    V = ctx.potential
    sides = disk_domain.disk_identity(V, z, m_max=ctx.config.mmax, rule=ctx.rule())
    return {
        "z": z,
        "lhs": sides["lhs"],
        "rhs": sides["rhs"],
        "modes": sides["modes"],
        "rel_dev": _rel(sides["lhs"], sides["rhs"]),
    }


# ===== REGISTRY =====

_HALFLINE_WELL = {"potential": "square_well", "params": {"depth": "2", "radius": "1"}, "dimension": 1}

COMMAND_SPECS: Dict[str, CommandSpec] = {
    "jost": CommandSpec(
        name="jost",
        defaults={**_HALFLINE_WELL, "z_start": -5.0, "z_stop": -0.1, "z_count": 20, "nodes": 512},
        checks={"dev_D": 1e-7, "dev_N": 1e-7},
        grid="z",
        point=jost_point,
    ),
    "det1d": CommandSpec(
        name="det1d",
        defaults={**_HALFLINE_WELL, "z_start": -5.0, "z_stop": -0.1, "z_count": 20, "nodes": 256},
        checks={"increment_D": 1e-8, "increment_N": 1e-8},
        grid="z",
        point=det1d_point,
    ),
    "ratio1d": CommandSpec(
        name="ratio1d",
        defaults={**_HALFLINE_WELL, "z_start": -5.0, "z_stop": -0.1, "z_count": 20, "nodes": 256},
        checks={"dev_det_m": 1e-7, "dev_det_formula": 1e-7, "dev_m_formula": 1e-7},
        grid="z",
        point=ratio1d_point,
    ),
    "sweep": CommandSpec(
        name="sweep",
        defaults={**_HALFLINE_WELL, "z_start": -5.0, "z_stop": -0.1, "z_count": 50, "nodes": 256},
        checks={"dev_D": 1e-7, "dev_N": 1e-7},
        grid="z",
        point=sweep_point,
    ),
    "wa": CommandSpec(
        name="wa",
        defaults={"z_count": 20},
        checks={"mismatch": 0.0},
        grid="instances",
        point=wa_point,
        needs_potential=False,
    ),
    "ssf": CommandSpec(
        name="ssf",
        defaults={
            "potential": "square_well",
            "params": {"depth": "1", "radius": "1"},
            "dimension": 3,
            "lambda_start": 0.1,
            "lambda_stop": 10.0,
            "lambda_count": 50,
            "nodes": 128,
        },
        checks={"dev_xi": 1e-3},
        grid="lambda",
        batch=ssf_batch,
    ),
    "sdet": CommandSpec(
        name="sdet",
        defaults={
            "potential": "square_well",
            "params": {"depth": "1", "radius": "1"},
            "dimension": 3,
            "lambda_start": 0.1,
            "lambda_stop": 10.0,
            "lambda_count": 50,
            "nodes": 128,
        },
        checks={"unitarity_dev": 1e-6, "dev_xi": 1e-6, "dev_oracle": 1e-4},
        grid="lambda",
        batch=sdet_batch,
    ),
    "disk": CommandSpec(
        name="disk",
        defaults={
            "potential": "radial_bump",
            "params": {"amplitude": "-3", "radius": "0.6"},
            "dimension": 2,
            "z_start": -6.0,
            "z_stop": -1.0,
            "z_count": 5,
            "nodes": 128,
            "mmax": 20,
        },
        checks={"rel_dev": 1e-4},
        grid="z",
        point=disk_point,
    ),
}


def resolve_defaults(config: RunConfig, settings: Settings) -> RunConfig:
    """Fill unset fields from the command's defaults and the settings."""
    if config.command not in COMMAND_SPECS:
        raise UsageError(f"Unknown command {config.command!r}; choose from {sorted(COMMAND_SPECS)}")
    spec = COMMAND_SPECS[config.command]
    updates: Dict[str, Any] = {}
    for key, value in spec.defaults.items():
        if key != "params" and getattr(config, key) is None:
            updates[key] = value
    # library parameters only follow the default potential
    if config.potential is None and not config.params and "params" in spec.defaults:
        updates["params"] = dict(spec.defaults["params"])
    resolved = replace(config, **updates)
    return replace(
        resolved,
        seed=settings.seed if resolved.seed is None else resolved.seed,
        tol=settings.tol if resolved.tol is None else resolved.tol,
        workers=settings.workers if resolved.workers is None else resolved.workers,
    )


_RADIUS_KEYWORD = {"square_well", "square_barrier", "radial_bump"}


def build_context(config: RunConfig, settings: Settings) -> SuiteContext:
    spec = COMMAND_SPECS[config.command]
    potential = None
    if spec.needs_potential:
        params = dict(config.params)
        if config.cutoff is not None and config.potential not in ("zero", "tabulated"):
            params.setdefault("radius" if config.potential in _RADIUS_KEYWORD else "cutoff", str(config.cutoff))
        elif config.cutoff is not None and config.potential == "zero":
            params.setdefault("cutoff", str(config.cutoff))
        potential = build_potential(config.potential, params, dimension=config.dimension)
        logger.info(f"Potential: {potential.describe()}")
        logger.info(f"Integrability: {potential.integrability()}")
    return SuiteContext(config=config, settings=settings, potential=potential)


def grid_points(config: RunConfig) -> List[Any]:
    spec = COMMAND_SPECS[config.command]
    if spec.grid == "instances":
        return list(range(config.z_count))
    if spec.grid == "lambda":
        return np.linspace(config.lambda_start, config.lambda_stop, config.lambda_count).tolist()
    return np.linspace(config.z_start, config.z_stop, config.z_count).tolist()


def tolerances(config: RunConfig) -> Dict[str, float]:
    checks = COMMAND_SPECS[config.command].checks
    if config.tol is None:
        return dict(checks)
    return {column: config.tol for column in checks}
