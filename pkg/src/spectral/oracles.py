# ============================================================================
# ODE ORACLES
# File: src/spectral/oracles.py
# Purpose: Independent high-order ODE integrations used to validate the
#          determinant computations (Jost data, bound states, phase shifts)
# ============================================================================

import logging
from typing import List, Tuple

import numpy as np
from scipy import special
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from src.numerics.errors import DomainError, RefineGridError, UsageError
from src.numerics.specfun import (
    as_param,
    cylinder_j,
    cylinder_y,
    riccati_jhat,
    riccati_yhat,
)
from src.spectral.potentials import Potential

logger = logging.getLogger(__name__)

RTOL = 1e-12
ATOL = 1e-14


def _complex_rhs(V: Potential, z: complex):
    def rhs(x, y):
        f = y[0] + 1j * y[1]
        fp = y[2] + 1j * y[3]
        fpp = (V(np.array([x]))[0] - z) * f
        return [fp.real, fp.imag, fpp.real, fpp.imag]

    return rhs


def jost_by_shooting(V: Potential, z) -> Tuple[complex, complex]:
    """
    (f(z, 0), f'(z, 0)) by integrating -f'' + V f = z f from the support edge
    down to 0 with outgoing data f = e^{ikx}.
    """
    zp = as_param(z)
    k, a = zp.sqrt_z, V.cutoff
    f_a = np.exp(1j * k * a)
    fp_a = 1j * k * f_a
    sol = solve_ivp(
        _complex_rhs(V, zp.z),
        (a, 0.0),
        [f_a.real, f_a.imag, fp_a.real, fp_a.imag],
        method="DOP853",
        rtol=RTOL,
        atol=ATOL * max(1.0, abs(f_a)),
    )
    if not sol.success:
        raise RefineGridError(f"Jost shooting failed at z={zp.z}: {sol.message}")
    y = sol.y[:, -1]
    return complex(y[0], y[1]), complex(y[2], y[3])


def zero_energy_node_count(V: Potential, samples: int = 4000) -> int:
    """
    Number of negative Dirichlet eigenvalues on the half-line.

    Nodes of the z = 0 regular solution on (0, a], plus one more if its
    linear continuation beyond a crosses zero.
    """
    a = V.cutoff
    grid = np.linspace(0.0, a, samples + 1)
    sol = solve_ivp(
        lambda x, y: [y[1], V(np.array([x]))[0].real * y[0]],
        (0.0, a),
        [0.0, 1.0],
        method="DOP853",
        t_eval=grid,
        rtol=RTOL,
        atol=ATOL,
    )
    phi, dphi = sol.y[0], sol.y[1]
    nodes = int(np.sum(np.sign(phi[2:]) * np.sign(phi[1:-1]) < 0))
    if phi[-1] * dphi[-1] < 0:
        nodes += 1
    return nodes


def dirichlet_eigenvalues_by_shooting(V: Potential, z_min: float, z_max: float = -1e-3, samples: int = 400) -> List[float]:
    """Zeros of the shooting Jost function f(z, 0) on [z_min, z_max] (real V)."""
    zs = np.linspace(z_min, z_max, samples)
    values = np.array([jost_by_shooting(V, z)[0].real for z in zs])
    roots = []
    for i in np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]:
        roots.append(brentq(lambda z: jost_by_shooting(V, z)[0].real, zs[i], zs[i + 1], xtol=1e-13))
    return roots


# ===== VARIABLE-PHASE PHASE SHIFTS =====

def variable_phase_shift(V: Potential, lam: float, ell: int, dimension: int) -> float:
    """
    Phase shift from the phase equation of the radial problem.

    n = 3: delta' = -(1/k) V [jhat cos(delta) - yhat sin(delta)]^2
    n = 2: delta' = -(pi/2) r V [J cos(delta) - Y sin(delta)]^2
    integrated from r0 ~ 0 to the support edge with delta(r0) = 0. The
    solution is continuous in lambda and vanishes at high energy.
    """
    if lam <= 0:
        raise DomainError(f"phase shifts need lambda > 0, got {lam}")
    k = np.sqrt(lam)
    a = V.cutoff
    r0 = 1e-6 * a

    if dimension == 3:
        def rhs(r, d):
            kr = k * r
            s = riccati_jhat(ell, kr) * np.cos(d[0]) - riccati_yhat(ell, kr) * np.sin(d[0])
            return [-(V(np.array([r]))[0].real / k) * s ** 2]
    elif dimension == 2:
        def rhs(r, d):
            kr = k * r
            s = cylinder_j(ell, kr) * np.cos(d[0]) - cylinder_y(ell, kr) * np.sin(d[0])
            return [-0.5 * np.pi * r * V(np.array([r]))[0].real * s ** 2]
    else:
        raise UsageError(f"dimension must be 2 or 3, got {dimension}")

    sol = solve_ivp(rhs, (r0, a), [0.0], method="DOP853", rtol=1e-11, atol=1e-13)
    if not sol.success or not np.isfinite(sol.y[0, -1]):
        raise RefineGridError(f"phase equation failed for l={ell}, lambda={lam}: {sol.message}")
    return float(sol.y[0, -1])


def _decaying_mismatch(V: Potential, z: float, nu: float, r0: float) -> float:
    """
    u'(a) g(a) - u(a) g'(a) for the regular reduced solution u ~ r^{nu + 1/2}
    and the decaying exterior solution g = sqrt(r) K_nu(kappa r).

    Both factors are rescaled by positive numbers, so only the sign and the
    zeros are meaningful.
    """
    a = V.cutoff
    kappa = np.sqrt(-z)
    centrifugal = nu * nu - 0.25

    def rhs(r, y):
        return [y[1], (centrifugal / r ** 2 + V(np.array([r]))[0].real - z) * y[0]]

    y = [r0 ** (nu + 0.5), (nu + 0.5) * r0 ** (nu - 0.5)]
    breaks = sorted({r0, *[b for b in V.breakpoints if r0 < b < a], a})
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        sol = solve_ivp(rhs, (lo, hi), y, method="DOP853", rtol=RTOL, atol=ATOL * r0 ** (nu + 0.5))
        if not sol.success:
            raise RefineGridError(f"bound-state shooting failed at z={z}: {sol.message}")
        y = sol.y[:, -1] / np.hypot(*sol.y[:, -1])
    x = kappa * a
    k_nu = special.kve(nu, x)
    dk_nu = -0.5 * (special.kve(nu - 1.0, x) + special.kve(nu + 1.0, x))
    g = np.sqrt(a) * k_nu
    dg = 0.5 * k_nu / np.sqrt(a) + np.sqrt(a) * kappa * dk_nu
    return float(y[1] * g - y[0] * dg)


def ground_state_by_shooting(V: Potential, ell: int = 0, samples: int = 400) -> float:
    """
    Lowest eigenvalue of channel ell.

    The reduced radial equation -u'' + (V + (nu^2 - 1/4) / r^2) u = z u has
    nu = ell + (n - 2) / 2; n = 1 is the Dirichlet half-line problem.
    """
    if ell < 0:
        raise UsageError(f"channel index must be nonnegative, got {ell}")
    if V.dimension == 1 and ell != 0:
        raise UsageError("the half-line problem has the single channel ell = 0")
    nu = abs(ell + 0.5 * (V.dimension - 2))
    r0 = 1e-6 * V.cutoff

    def mismatch(z: float) -> float:
        return _decaying_mismatch(V, z, nu, r0)

    zs = np.linspace(-V.max_abs(), -1e-4, samples)
    values = np.array([mismatch(z) for z in zs])
    crossings = np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]
    if len(crossings) == 0:
        raise RefineGridError(f"no bound state found in channel l={ell}")
    i = crossings[0]
    return float(brentq(mismatch, zs[i], zs[i + 1], xtol=1e-13))


# ===== DISK MODES =====

def disk_mode_ratio_by_shooting(V: Potential, m: int, z: float, r0: float = 1e-5) -> complex:
    """
    Mode-m Neumann/Dirichlet det_2 ratio on the unit disk from the regular solution.

    phi'(1) J_m(k) / (phi(1) k J_m'(k)), times exp(-int V J_m(kr)^2 r dr / (k J_m(k) J_m'(k))),
    with phi ~ r^m at r0 integrated to r = 1.
    """
    zp = as_param(z)
    k = zp.sqrt_z

    def rhs(r, y):
        phi = y[0] + 1j * y[1]
        dphi = y[2] + 1j * y[3]
        d2 = -dphi / r + (m * m / r ** 2 + V(np.array([r]))[0] - zp.z) * phi
        return [dphi.real, dphi.imag, d2.real, d2.imag]

    start = [r0 ** m, 0.0, m * r0 ** (m - 1) if m else 0.0, 0.0]
    breaks = sorted({r0, *[b for b in (*V.breakpoints, V.cutoff) if r0 < b < 1.0], 1.0})
    y = start
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        sol = solve_ivp(rhs, (lo, hi), y, method="DOP853", rtol=RTOL, atol=ATOL * r0 ** m)
        if not sol.success:
            raise RefineGridError(f"disk mode shooting failed for m={m}: {sol.message}")
        y = sol.y[:, -1]
    phi1 = complex(y[0], y[1])
    dphi1 = complex(y[2], y[3])
    J, dJ = complex(special.jv(m, k)), complex(special.jvp(m, k))
    rule = V.rule(256)
    r = rule.nodes
    overlap = complex(np.sum(rule.weights * V(r) * special.jv(m, k * r) ** 2 * r))
    return (dphi1 * J) / (phi1 * k * dJ) * np.exp(-overlap / (k * J * dJ))
