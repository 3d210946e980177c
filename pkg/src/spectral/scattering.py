# ============================================================================
# SCATTERING
# File: src/spectral/scattering.py
# Purpose: Modified Fredholm determinants of radial Schrodinger operators in
#          n = 2, 3 by partial waves, the Krein spectral shift function and
#          the scattering determinant, with a phase-shift oracle
# ============================================================================

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
from scipy import linalg, special
from scipy.optimize import brentq

from src.numerics.detcore import det_regularized, log_det_regularized
from src.numerics.errors import (
    ChannelTruncationError,
    GridTooCoarseError,
    KernelSingularityError,
    UsageError,
)
from src.numerics.quadrature import (
    QuadratureRule,
    assemble_bs_kinked,
    gauss_legendre,
    product_integration_matrix,
    separable_kernel,
)
from src.numerics.specfun import (
    SCALED_ORDER_MARGIN,
    SpectralParam,
    as_param,
    bessel_jh_product,
    cylinder_h1,
    cylinder_j,
    riccati_jhat,
    riccati_outgoing,
)
from src.spectral.oracles import variable_phase_shift
from src.spectral.potentials import Potential

logger = logging.getLogger(__name__)

Spectral = Union[complex, float, SpectralParam]

DEFAULT_NODES = 128
TRUNCATION_TOL = 1e-10
RESIDUAL_TOL = 1e-6
MAX_LMAX = 256
TAIL_POINTS = 32
TAIL_TERMS = 2000
UNWRAP_STEP = np.pi / 4
GRID_STEP_LIMIT = np.pi / 2
MAX_BISECTIONS = 14


# ===== KERNELS =====

def _reflected(k: complex, evaluate: Callable[[complex], np.ndarray]) -> np.ndarray:
    """Kernels with Re k < 0 (lower-side boundary values) by conjugate reflection."""
    if k.real < 0:
        return np.conj(evaluate(-np.conj(k)))
    return evaluate(k)


def free_kernel(n: int, z: Spectral, x, xp) -> complex:
    """
    Free resolvent kernel on R^n at points x != x'.

    n = 2: (i/4) H_0^{(1)}(k |x - x'|); n = 3: e^{i k |x - x'|} / (4 pi |x - x'|).
    """
    k = as_param(z).sqrt_z
    dist = float(np.linalg.norm(np.atleast_1d(np.asarray(x, dtype=float)) - np.atleast_1d(np.asarray(xp, dtype=float))))
    if dist == 0.0:
        raise KernelSingularityError("free kernel evaluated at coincident points")
    if n == 2:
        return complex(_reflected(k, lambda kk: 0.25j * cylinder_h1(0, kk * dist)))
    if n == 3:
        return complex(_reflected(k, lambda kk: np.exp(1j * kk * dist) / (4.0 * np.pi * dist)))
    raise UsageError(f"free_kernel supports n = 2, 3, got {n}")


@dataclass(frozen=True)
class ChannelSpec:
    index: int
    dimension: int

    @property
    def degeneracy(self) -> int:
        if self.dimension == 3:
            return 2 * self.index + 1
        return 1 if self.index == 0 else 2


def channel_kernel(n: int, ell: int, z: Spectral, r, rp) -> np.ndarray:
    """
    Outgoing radial Green kernel of channel ell.

    n = 3 acts on L^2(dr): jhat(k r<) w(k r>) / k (the half-line Dirichlet
    kernel for ell = 0). n = 2 acts on L^2(r dr): (i pi/2) J_ell(k r<) H_ell(k r>);
    its measure weight is supplied by `channel_density`.
    """
    if n not in (2, 3):
        raise UsageError(f"channel_kernel supports n = 2, 3, got {n}")
    return channel_matrix_kernel(n, ell, z)(np.asarray(r, dtype=float), np.asarray(rp, dtype=float))


def _channel_factors(n: int, ell: int, k: complex):
    if n == 3:
        return (lambda r: riccati_jhat(ell, k * r) / k), (lambda r: riccati_outgoing(ell, k * r))
    return (lambda r: 0.5j * np.pi * cylinder_j(ell, k * r)), (lambda r: cylinder_h1(ell, k * r))


def _large_order_kernel(n: int, ell: int, k: complex):
    """(i pi/2) J_nu(k r<) H_nu(k r>), times sqrt(r r') with nu = ell + 1/2 in n = 3."""
    nu = ell + 0.5 if n == 3 else float(ell)

    def kernel(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        X, Y = np.asarray(X, dtype=float), np.asarray(Y, dtype=float)
        lo, hi = np.minimum(X, Y), np.maximum(X, Y)
        values = 0.5j * np.pi * bessel_jh_product(nu, k * lo, k * hi)
        return np.sqrt(lo * hi) * values if n == 3 else values

    return kernel


def _channel_kernel_at(n: int, ell: int, k: complex):
    if ell < SCALED_ORDER_MARGIN:
        return separable_kernel(*_channel_factors(n, ell, k))
    return _large_order_kernel(n, ell, k)


def channel_matrix_kernel(n: int, ell: int, z: Spectral):
    """
    Broadcasting kernel of channel ell for matrix assembly.

    From ell = 10 on, the kernel is evaluated as (r</r>)^nu times normalized
    series wherever the order dominates k r.
    """
    if n not in (2, 3):
        raise UsageError(f"channel kernels need n = 2, 3, got {n}")
    k = as_param(z).sqrt_z
    if k.real < 0:
        mirrored = _channel_kernel_at(n, ell, -np.conj(k))
        return lambda X, Y: np.conj(mirrored(X, Y))
    return _channel_kernel_at(n, ell, k)


def channel_kernel_derivative(n: int, ell: int, z: Spectral):
    """
    Broadcasting kernel of d/dz g_ell(z), i.e. the channel kernel of R0(z)^2.

    Both dimensions share (i pi/2) J_nu(k r<) H_nu(k r>) with nu = ell in
    n = 2 and nu = ell + 1/2 times sqrt(r r') in n = 3.
    """
    if n not in (2, 3):
        raise UsageError(f"channel kernels need n = 2, 3, got {n}")
    k = as_param(z).sqrt_z
    nu = ell + 0.5 if n == 3 else ell

    def evaluate(kk: complex, X, Y) -> np.ndarray:
        lo, hi = np.minimum(X, Y), np.maximum(X, Y)
        dk = 0.5j * np.pi * (
            lo * special.jvp(nu, kk * lo) * special.hankel1(nu, kk * hi)
            + special.jv(nu, kk * lo) * hi * special.h1vp(nu, kk * hi)
        )
        scale = np.sqrt(X * Y) if n == 3 else 1.0
        return scale * dk / (2.0 * kk)

    if k.real < 0:
        return lambda X, Y: np.conj(evaluate(-np.conj(k), X, Y))
    return lambda X, Y: evaluate(k, X, Y)


def channel_density(n: int) -> Optional[Callable[[np.ndarray], np.ndarray]]:
    return (lambda r: r) if n == 2 else None


def default_lmax(lam: float, cutoff: float) -> int:
    return int(np.ceil(np.sqrt(max(lam, 0.0)) * cutoff)) + 10


def channel_matrix(V: Potential, z: Spectral, ell: int, rule: QuadratureRule) -> np.ndarray:
    """Symmetrized Nystrom matrix of u g_ell(z) v."""
    n = V.dimension
    zp = as_param(z)
    u, v = V.factors(rule.nodes)
    op = assemble_bs_kinked(
        channel_matrix_kernel(n, ell, zp), rule, u, v, density=channel_density(n), p=2
    )
    return op.matrix


# ===== DETERMINANTS =====

@dataclass
class ChannelDeterminant:
    ell: int
    degeneracy: int
    det2: complex
    log_det2: complex = 0.0j
    square_trace: complex = 0.0j


def _rule(V: Potential, rule: Optional[QuadratureRule]) -> QuadratureRule:
    return rule if rule is not None else V.rule(DEFAULT_NODES)


def channel_determinants(
    V: Potential,
    z: Spectral,
    l_max: int,
    rule: Optional[QuadratureRule] = None,
    p: int = 2,
    start: int = 0,
) -> List[ChannelDeterminant]:
    """det_p of channels start..l_max, each with tr M^2 of its Nystrom matrix."""
    rule = _rule(V, rule)
    out = []
    for ell in range(start, l_max + 1):
        M = channel_matrix(V, z, ell, rule)
        log_det = log_det_regularized(M, p)
        out.append(
            ChannelDeterminant(
                ell=ell,
                degeneracy=ChannelSpec(ell, V.dimension).degeneracy,
                det2=complex(np.exp(log_det)),
                log_det2=log_det,
                square_trace=complex(np.sum(M * M.T)),
            )
        )
    return out


# ===== SECOND-ORDER TAIL =====

def _clustered(left: float, right: float, toward_left: bool, points: int = TAIL_POINTS):
    """Gauss-Legendre on [left, right] under s = end + (right - left) u^4, clustered at one end."""
    g, gw = np.polynomial.legendre.leggauss(points)
    u = 0.5 * (g + 1.0)
    length = right - left
    offset = length * u ** 4
    nodes = left + offset if toward_left else right - offset
    return nodes, 2.0 * length * u ** 3 * gw


def _both_ends(left: float, right: float, points: int = TAIL_POINTS):
    g, gw = np.polynomial.legendre.leggauss(points)
    u = 0.5 * (g + 1.0)
    length = right - left
    return left + length * u ** 2 * (3.0 - 2.0 * u), 3.0 * length * u * (1.0 - u) * gw


def radial_pair_integral(V: Potential, pair: Callable[[float, np.ndarray], np.ndarray]) -> complex:
    """
    int_0^a int_0^a f(r) f(s) F(r, s) dr ds with f(r) = r V(r).

    F may carry a logarithm or a kink on the diagonal. The inner integral is
    split at r and at the jumps of V, every piece clustered toward the end
    nearest r; the outer pieces are clustered toward both jumps.
    """
    edges = sorted({0.0, float(V.cutoff), *(float(b) for b in V.breakpoints if 0.0 < b < V.cutoff)})
    total = 0.0j
    for left, right in zip(edges[:-1], edges[1:]):
        R, WR = _both_ends(left, right)
        fR = R * V(R)
        for r, wr, fr in zip(R, WR, fR):
            if fr == 0:
                continue
            cuts = sorted(set(edges) | {float(r)})
            inner = 0.0j
            for p, q in zip(cuts[:-1], cuts[1:]):
                S, WS = _clustered(p, q, toward_left=abs(p - r) <= abs(q - r))
                inner += np.sum(WS * S * V(S) * pair(float(r), S))
            total += wr * fr * inner
    return complex(total)


def hilbert_schmidt_trace(V: Potential, z: Spectral) -> complex:
    """
    tr (u R0(z) v)^2 on L^2(R^3).

    Angular integration of e^{2ik|x-y|} / (4 pi |x-y|)^2 leaves
    (1/2) int int rV(r) sV(s) [E1(c|r - s|) - E1(c(r + s))] dr ds, c = -2ik,
    and (1/2) log((r + s) / |r - s|) in the bracket at z = 0.
    """
    if V.dimension != 3:
        raise UsageError(f"hilbert_schmidt_trace is three-dimensional, got n = {V.dimension}")
    c = -2j * as_param(z).sqrt_z
    if c == 0:
        return radial_pair_integral(V, lambda r, s: 0.5 * np.log((r + s) / np.abs(r - s)))
    return radial_pair_integral(V, lambda r, s: 0.5 * (special.exp1(c * np.abs(r - s)) - special.exp1(c * (r + s))))


def planar_tail_kernel(l_max: int, z: Spectral, terms: int = TAIL_TERMS):
    """
    sum_{m > l_max} 2 g_m(r, s)^2 for n = 2 from the large-order expansion

    g_m = (t^m / 2m) [1 + z (R^2 / (m - 1) - rho^2 / (m + 1)) / 4 + O(m^-2)],
    t = rho / R, rho = min(r, s), R = max(r, s). The leading sum is
    Li_2(t^2) / 2 minus its first l_max terms.
    """
    zval = as_param(z).z
    head = np.arange(1, l_max + 1, dtype=float)
    tail = np.arange(l_max + 1, l_max + terms + 1, dtype=float)
    # the m = 1 channel has no R^2 term
    outer_coeff = np.where(tail > 1.0, 1.0 / (tail ** 2 * np.maximum(tail - 1.0, 1.0)), 0.0)
    inner_coeff = 1.0 / (tail ** 2 * (tail + 1.0))

    def pair(r: float, s: np.ndarray) -> np.ndarray:
        rho, R = np.minimum(r, s), np.maximum(r, s)
        t2 = (rho / R) ** 2
        leading = special.spence(1.0 - t2) - np.sum(t2[:, None] ** head / head ** 2, axis=1)
        powers = t2[:, None] ** tail
        first = np.sum(powers * ((R ** 2)[:, None] * outer_coeff - (rho ** 2)[:, None] * inner_coeff), axis=1)
        return 0.5 * leading + 0.25 * zval * first

    return pair


def _second_order_tail(V: Potential, zp: SpectralParam, channels: List[ChannelDeterminant], full: Optional[complex]):
    """
    -(1/2) sum_{l > L} deg tr K_l^2 and a residual estimate.

    The residual is L times the beyond-second-order part of channel L, plus in
    n = 2 the relative (|z| a^2)^2 / L^2 error of the expansion applied to the tail.
    """
    last = channels[-1]
    L = max(last.ell, 1)
    third_order = last.degeneracy * abs(last.log_det2 + 0.5 * last.square_trace)
    if V.dimension == 3:
        computed = sum(ch.degeneracy * ch.square_trace for ch in channels)
        tail = -0.5 * (full - computed)
        return complex(tail), float(L * third_order)
    tail = -0.5 * radial_pair_integral(V, planar_tail_kernel(last.ell, zp))
    expansion = (abs(zp.z) * V.cutoff ** 2) ** 2 / L ** 2 * abs(tail)
    return complex(tail), float(L * third_order + expansion)


@dataclass
class PartialWaveDet2:
    det2: complex
    l_max: int
    tail: complex
    residual: float
    channels: List[ChannelDeterminant] = field(default_factory=list)


def partial_wave_det2(
    V: Potential,
    z: Spectral,
    l_max: Optional[int] = None,
    rule: Optional[QuadratureRule] = None,
    tol: Optional[float] = RESIDUAL_TOL,
) -> PartialWaveDet2:
    """
    det_2(I + u R0(z) v) on L^2(R^n) from channels 0..L and a second-order tail.

    Channels past L enter through -(1/2) sum_{l > L} deg tr K_l^2: the full
    Hilbert-Schmidt trace minus the computed channels for n = 3, the
    large-order expansion of the channel kernels for n = 2. With l_max=None,
    L starts at default_lmax and doubles up to MAX_LMAX until the residual
    estimate is below tol; a fixed l_max is only checked.

    Raises:
        ChannelTruncationError: residual estimate at or above tol
    """
    if V.dimension not in (2, 3):
        raise UsageError(f"det2_bs needs a radial potential with n = 2, 3, got n = {V.dimension}")
    zp = as_param(z)
    rule = _rule(V, rule)
    grow = l_max is None
    L = default_lmax(abs(zp.z), V.cutoff) if grow else int(l_max)
    if L < 0:
        raise UsageError(f"l_max must be nonnegative, got {L}")
    full = hilbert_schmidt_trace(V, zp) if V.dimension == 3 else None

    channels: List[ChannelDeterminant] = []
    while True:
        channels.extend(channel_determinants(V, zp, L, rule, start=len(channels)))
        tail, residual = _second_order_tail(V, zp, channels, full)
        logger.debug(f"det2 partial waves at z={zp.z}: l_max={L}, tail={tail:.3e}, residual={residual:.3e}")
        if tol is None or residual < tol or not grow or L >= MAX_LMAX:
            break
        L = min(2 * L, MAX_LMAX)
    if tol is not None and residual >= tol:
        raise ChannelTruncationError(
            f"partial waves up to l={L} leave an estimated |log det2| error {residual:.3e} >= {tol:.1e}",
            last_increment=residual,
        )
    log_total = sum(ch.degeneracy * ch.log_det2 for ch in channels) + tail
    return PartialWaveDet2(det2=complex(np.exp(log_total)), l_max=L, tail=tail, residual=residual, channels=channels)


def det2_bs(
    V: Potential,
    z: Spectral,
    l_max: Optional[int] = None,
    rule: Optional[QuadratureRule] = None,
    tol: Optional[float] = RESIDUAL_TOL,
) -> complex:
    """det_2(I + u R0(z) v) on L^2(R^n); see `partial_wave_det2`."""
    return partial_wave_det2(V, z, l_max, rule, tol).det2


def bound_states(
    V: Potential,
    ell: int = 0,
    z_min: Optional[float] = None,
    z_max: float = -1e-3,
    samples: int = 200,
    rule: Optional[QuadratureRule] = None,
) -> List[float]:
    """Negative eigenvalues of channel ell as zeros of its (real) det_2."""
    rule = _rule(V, rule)
    z_min = -V.max_abs() - 1e-9 if z_min is None else z_min

    def real_det(z: float) -> float:
        return det_regularized(channel_matrix(V, z, ell, rule), 2).real

    zs = np.linspace(z_min, z_max, samples)
    values = np.array([real_det(z) for z in zs])
    return [
        brentq(real_det, zs[i], zs[i + 1], xtol=1e-13)
        for i in np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]
    ]


# ===== PHASE UNWRAPPING =====

class _ChannelPhase:
    """Continuous arg of det_2 of one channel along a path in the upper half-plane."""

    def __init__(self, V: Potential, ell: int, rule: QuadratureRule):
        self.V, self.ell, self.rule = V, ell, rule

    def det(self, z: Spectral) -> complex:
        return det_regularized(channel_matrix(self.V, z, self.ell, self.rule), 2)

    def walk(self, start: complex, end: complex, phase: float, det_start: complex, end_param=None, depth: int = 0):
        """Carry `phase` (arg det at start) to `end`, bisecting while |d arg| > pi/4."""
        det_end = self.det(end_param if end_param is not None else end)
        step = float(np.angle(det_end / det_start))
        if abs(step) <= UNWRAP_STEP or depth >= MAX_BISECTIONS:
            return phase + step, det_end
        mid = 0.5 * (start + end)
        phase_mid, det_mid = self.walk(start, mid, phase, det_start, depth=depth + 1)
        return self.walk(mid, end, phase_mid, det_mid, end_param=end_param, depth=depth + 1)


def _path_phase(channel: _ChannelPhase, target: SpectralParam, lam_low: float, eta: float, segments: int = 8):
    """
    arg det_2 at the target, unwrapped from lam_low (below the spectrum,
    det_2 > 0) via lam_low + i eta and target + i eta.
    """
    lam = target.z.real
    corners = [complex(lam_low), complex(lam_low, eta), complex(lam, eta), target.z]
    det_prev = channel.det(corners[0])
    phase = float(np.angle(det_prev))
    current = corners[0]
    for a, b in zip(corners[:-1], corners[1:]):
        for t in np.linspace(0.0, 1.0, segments + 1)[1:]:
            point = a + t * (b - a)
            final = (b == corners[-1]) and t == 1.0
            phase, det_prev = channel.walk(current, point, phase, det_prev, end_param=target if final else None)
            current = point
    return phase, det_prev


@dataclass
class SSFResult:
    lam: float
    xi: float
    det2_plus: complex
    det2_minus: complex
    correction: float
    channel_phases: List[float] = field(default_factory=list)


def _xi_correction(V: Potential, lam: float) -> float:
    """Contribution (1/2 pi i) (i/2 pi) int V {pi | lambda^{1/2}} of the trace term."""
    if lam <= 0:
        return 0.0
    factor = np.pi if V.dimension == 2 else np.sqrt(lam)
    return float((V.volume_integral().real * factor) / (4.0 * np.pi ** 2))


def _channel_params(lam: float, boundary_eps: Optional[float]):
    if boundary_eps:
        return SpectralParam.from_z(complex(lam, boundary_eps)), SpectralParam.from_z(complex(lam, -boundary_eps))
    return SpectralParam.boundary(lam, +1), SpectralParam.boundary(lam, -1)


def _assemble_result(V, lam, phases, plus, minus, degeneracies) -> SSFResult:
    det_plus = np.prod([d ** g for d, g in zip(plus, degeneracies)])
    det_minus = np.prod([d ** g for d, g in zip(minus, degeneracies)])
    correction = _xi_correction(V, lam)
    xi = float(np.dot(degeneracies, phases) / np.pi) + correction
    return SSFResult(
        lam=lam,
        xi=xi,
        det2_plus=complex(det_plus),
        det2_minus=complex(det_minus),
        correction=correction,
        channel_phases=list(phases),
    )


def _check_truncation(phases: Sequence[float], degeneracies: Sequence[int], tol: float) -> None:
    last = degeneracies[-1] * abs(phases[-1])
    if 2.0 * last >= tol:
        raise ChannelTruncationError(
            f"last channel contributes |log(det2+/det2-)| = {2.0 * last:.3e} >= {tol:.1e}; raise l_max",
            last_increment=2.0 * last,
        )


def spectral_shift(
    V: Potential,
    lam: float,
    l_max: Optional[int] = None,
    rule: Optional[QuadratureRule] = None,
    boundary_eps: Optional[float] = None,
    tol: float = TRUNCATION_TOL,
) -> SSFResult:
    """
    Krein spectral shift function xi(lambda) normalized to vanish below inf sigma(H).

    2 pi i xi = log[det_2(lambda + i0) / det_2(lambda - i0)] + trace correction,
    each channel's arg continued from below the spectrum through the upper
    half-plane. For lambda <= 0 this returns minus the number of eigenvalues
    at or below lambda.
    """
    return spectral_shift_sweep(V, [lam], l_max, rule, boundary_eps, tol)[0]


def spectral_shift_sweep(
    V: Potential,
    lams: Sequence[float],
    l_max: Optional[int] = None,
    rule: Optional[QuadratureRule] = None,
    boundary_eps: Optional[float] = None,
    tol: float = TRUNCATION_TOL,
) -> List[SSFResult]:
    """
    xi on an increasing lambda grid: the first point is reached through the
    upper half-plane, later points by continuation along the grid with arg
    increments below pi/2.
    """
    lams = [float(x) for x in lams]
    if any(b <= a for a, b in zip(lams[:-1], lams[1:])):
        raise UsageError("lambda grid must be strictly increasing")
    if V.dimension not in (2, 3):
        raise UsageError(f"spectral_shift needs n = 2, 3, got n = {V.dimension}")
    rule = _rule(V, rule)
    l_max = default_lmax(max(lams[-1], 0.0), V.cutoff) if l_max is None else l_max
    degeneracies = [ChannelSpec(ell, V.dimension).degeneracy for ell in range(l_max + 1)]
    lam_low = -V.max_abs() - 1.0
    eta = max(1.0, 0.5 * abs(lams[0] - lam_low))

    channels = [_ChannelPhase(V, ell, rule) for ell in range(l_max + 1)]
    results: List[SSFResult] = []
    phases: List[float] = []
    dets_plus: List[complex] = []
    for index, lam in enumerate(lams):
        plus_param, minus_param = _channel_params(lam, boundary_eps)
        if index == 0:
            for ch in channels:
                phase, det_plus = _path_phase(ch, plus_param, lam_low, eta)
                phases.append(phase)
                dets_plus.append(det_plus)
        else:
            for c, ch in enumerate(channels):
                det_plus = ch.det(plus_param)
                step = float(np.angle(det_plus / dets_plus[c]))
                if abs(step) >= GRID_STEP_LIMIT:
                    raise GridTooCoarseError(
                        f"arg det2 of channel {ch.ell} jumps by {step:.3f} between "
                        f"lambda={lams[index - 1]} and {lam}; refine the grid"
                    )
                phases[c] += step
                dets_plus[c] = det_plus
        _check_truncation(phases, degeneracies, tol)
        dets_minus = [ch.det(minus_param) for ch in channels]
        result = _assemble_result(V, lam, list(phases), list(dets_plus), dets_minus, degeneracies)
        logger.debug(f"xi({lam}) = {result.xi:.12g}")
        results.append(result)
    return results


def bound_state_count(V: Potential, l_max: Optional[int] = None, rule: Optional[QuadratureRule] = None) -> int:
    """Number of negative eigenvalues, read off xi(0-)."""
    result = spectral_shift(V, -1e-9, l_max=l_max if l_max is not None else 10, rule=rule)
    return int(round(-result.xi))


# ===== TRACE TERMS =====

def trace_correction(V: Union[Potential, complex], z: Spectral, n: int) -> complex:
    """(1/4 pi) int V d^n x times {-1/z for n = 2; i / (2 sqrt z) for n = 3}."""
    zp = as_param(z)
    integral = V.volume_integral() if isinstance(V, Potential) else complex(V)
    if n == 2:
        return integral / (4.0 * np.pi) * (-1.0 / zp.z)
    if n == 3:
        return integral / (4.0 * np.pi) * (1j / (2.0 * zp.sqrt_z))
    raise UsageError(f"trace_correction supports n = 2, 3, got {n}")


def log_det2_derivative_check(
    V: Potential,
    z: complex,
    l_max: Optional[int] = None,
    rule: Optional[QuadratureRule] = None,
    fd_step: float = 1e-3,
) -> dict:
    """
    d/dz log det_2 (finite differences) against -trace(R - R0 + R0 V R0),
    both summed over channels with degeneracies.

    Per channel the trace is tr((I + K)^{-1} K K') with K = u R0 v and
    K' = u R0^2 v, where R0^2 = dR0/dz is the analytic z-derivative kernel.
    """
    rule = _rule(V, rule)
    n = V.dimension
    l_max = default_lmax(abs(z), V.cutoff) if l_max is None else l_max
    u, v = V.factors(rule.nodes)
    density = channel_density(n)
    lhs = 0.0j
    rhs = 0.0j
    for ell in range(l_max + 1):
        deg = ChannelSpec(ell, n).degeneracy

        def logdet(w: complex) -> complex:
            return log_det_regularized(channel_matrix(V, w, ell, rule), 2)

        h = fd_step
        samples = [logdet(z + s * h) for s in (-2, -1, 1, 2)]
        anchor = logdet(z)
        samples = [anchor + np.log(np.exp(s - anchor)) for s in samples]
        lhs += deg * (-samples[3] + 8 * samples[2] - 8 * samples[1] + samples[0]) / (12 * h)

        W = product_integration_matrix(channel_matrix_kernel(n, ell, z), rule, density=density)
        W_prime = product_integration_matrix(channel_kernel_derivative(n, ell, z), rule, density=density)
        K = u[:, None] * W * v[None, :]
        K_prime = u[:, None] * W_prime * v[None, :]
        rhs -= deg * np.trace(linalg.solve(np.eye(len(u)) + K, K @ K_prime))
    return {"lhs": complex(lhs), "rhs": complex(rhs)}


# ===== DIRECT 3D CROSS-CHECK =====

def ball_potential(k: complex, radius: float, r: np.ndarray) -> np.ndarray:
    """
    int_{|y| < radius} e^{ik|x-y|} / (4 pi |x-y|) dy at |x| = r < radius.

    -1/k^2 + (1 - ik a) e^{ika} sin(kr) / (k^3 r); a^2/2 - r^2/6 at k = 0.
    """
    r = np.asarray(r, dtype=float)
    if k == 0:
        return (0.5 * radius ** 2 - r ** 2 / 6.0).astype(complex)
    sinc = np.where(r > 0, np.sin(k * r) / (k * np.where(r > 0, r, 1.0)), 1.0)
    return -1.0 / k ** 2 + (1.0 - 1j * k * radius) * np.exp(1j * k * radius) * sinc / k ** 2


def direct_nystrom_det2(
    V: Potential,
    z: Spectral,
    radial_nodes: int = 10,
    polar_nodes: int = 10,
    azimuth_nodes: int = 20,
) -> complex:
    """
    det_2(I + u R0(z) v) assembled on a spherical product grid in R^3.

    Gauss-Legendre in r and cos(theta), midpoints in phi. The singular
    kernel is integrated against v f - (v f)(x_i); the subtracted part is
    the exact potential of the support ball, which lands on the diagonal.

    Args:
        V: radial potential with dimension 3
        z: spectral parameter
        radial_nodes, polar_nodes, azimuth_nodes: grid sizes

    Returns:
        det_2 of the Nystrom matrix on radial_nodes * polar_nodes * azimuth_nodes points
    """
    if V.dimension != 3:
        raise UsageError(f"direct_nystrom_det2 is three-dimensional, got n = {V.dimension}")
    k = as_param(z).sqrt_z
    radial = gauss_legendre(radial_nodes, 0.0, V.cutoff)
    t, tw = np.polynomial.legendre.leggauss(polar_nodes)
    phi = 2.0 * np.pi * (np.arange(azimuth_nodes) + 0.5) / azimuth_nodes
    pw = np.full(azimuth_nodes, 2.0 * np.pi / azimuth_nodes)

    r, ct, ph = (a.ravel() for a in np.meshgrid(radial.nodes, t, phi, indexing="ij"))
    weights = np.einsum("i,j,k->ijk", radial.weights * radial.nodes ** 2, tw, pw).ravel()
    st = np.sqrt(1.0 - ct ** 2)
    points = np.column_stack([r * st * np.cos(ph), r * st * np.sin(ph), r * ct])
    dist = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1)
    np.fill_diagonal(dist, 1.0)

    def kernel(kk: complex) -> np.ndarray:
        G = np.exp(1j * kk * dist) / (4.0 * np.pi * dist) * weights[None, :]
        np.fill_diagonal(G, 0.0)
        np.fill_diagonal(G, ball_potential(kk, V.cutoff, r) - G.sum(axis=1))
        return G

    G = _reflected(k, kernel)
    u, v = V.factors(r)
    matrix = u[:, None] * G * v[None, :]
    logger.debug(f"direct 3D Nystrom on {len(r)} nodes at z={as_param(z).z}")
    return det_regularized(matrix, 2)


# ===== SCATTERING DETERMINANT =====

def scattering_det(
    V: Potential,
    lam: float,
    l_max: Optional[int] = None,
    rule: Optional[QuadratureRule] = None,
    tol: float = TRUNCATION_TOL,
) -> complex:
    """
    det S(lambda) = [det_2(lambda - i0) / det_2(lambda + i0)] exp(-(i/2) int V) (n = 2)
    or exp(-(i lambda^{1/2} / 2 pi) int V) (n = 3).
    """
    if lam <= 0:
        raise UsageError(f"scattering_det needs lambda > 0, got {lam}")
    rule = _rule(V, rule)
    l_max = default_lmax(lam, V.cutoff) if l_max is None else l_max
    plus, minus = SpectralParam.boundary(lam, +1), SpectralParam.boundary(lam, -1)
    log_ratio = 0.0j
    last = 0.0
    for ell in range(l_max + 1):
        deg = ChannelSpec(ell, V.dimension).degeneracy
        d_plus = det_regularized(channel_matrix(V, plus, ell, rule), 2)
        d_minus = det_regularized(channel_matrix(V, minus, ell, rule), 2)
        last = deg * abs(np.log(d_minus / d_plus))
        log_ratio += deg * np.log(d_minus / d_plus)
    if last >= tol:
        raise ChannelTruncationError(f"last channel contributes {last:.3e}; raise l_max", last_increment=last)
    integral = V.volume_integral()
    if V.dimension == 2:
        trace_phase = -0.5j * integral
    else:
        trace_phase = -1j * np.sqrt(lam) * integral / (2.0 * np.pi)
    return complex(np.exp(log_ratio + trace_phase))


# ===== PHASE-SHIFT ORACLE =====

def phase_shift_oracle(V: Potential, lam: float, ell: int) -> float:
    """delta_ell(lambda) from the variable-phase equation (Levinson branch)."""
    return variable_phase_shift(V, lam, ell, V.dimension)


def oracle_spectral_shift(V: Potential, lam: float, l_max: Optional[int] = None) -> float:
    """-(1/pi) sum_ell deg(ell) delta_ell(lambda)."""
    l_max = default_lmax(lam, V.cutoff) if l_max is None else l_max
    total = sum(ChannelSpec(ell, V.dimension).degeneracy * phase_shift_oracle(V, lam, ell) for ell in range(l_max + 1))
    return float(-total / np.pi)


def oracle_scattering_det(V: Potential, lam: float, l_max: Optional[int] = None) -> complex:
    """prod_ell exp(2 i deg(ell) delta_ell(lambda))."""
    return complex(np.exp(-2j * np.pi * oracle_spectral_shift(V, lam, l_max)))
