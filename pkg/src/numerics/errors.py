# ============================================================================
# ERRORS
# File: src/numerics/errors.py
# Purpose: Exception hierarchy shared by the numerical and spectral packages
# ============================================================================

from typing import Optional, Sequence


class SpectralComputationError(Exception):
    """Base class for every failure raised by this project."""


# ===== PARAMETER / SHAPE ERRORS =====

class DimensionError(SpectralComputationError, ValueError):
    """Matrix is not square or operands are not conformable."""


class UnsupportedOrderError(SpectralComputationError, ValueError):
    """Regularization order outside {1, 2}."""


class IntervalError(SpectralComputationError, ValueError):
    """Quadrature interval with a >= b or a non-positive length."""


class DomainError(SpectralComputationError, ValueError):
    """Special-function argument outside its domain."""


class HypothesisViolationError(SpectralComputationError, ValueError):
    """Input violates a structural hypothesis (Hermiticity, resolvent set, ...)."""


class UsageError(SpectralComputationError, ValueError):
    """Invalid run configuration or flag combination."""


# ===== NUMERICAL FAILURES =====

class SingularPointError(SpectralComputationError):
    """I - L(z) is numerically singular at the requested point."""

    def __init__(self, message: str, condition: Optional[float] = None):
        super().__init__(message)
        self.condition = condition


class ContourError(SpectralComputationError):
    """Contour passes too close to a zero, pole or eigenvalue."""

    def __init__(self, message: str, value: Optional[complex] = None):
        super().__init__(message)
        self.value = value


class ResolutionError(SpectralComputationError):
    """Trace of a Riesz projection is not close to an integer."""


class KernelSingularityError(SpectralComputationError):
    """Kernel returned NaN or infinity at a node pair."""

    def __init__(self, message: str, node_pair: Optional[tuple] = None):
        super().__init__(message)
        self.node_pair = node_pair


class ScaledEvaluationError(SpectralComputationError):
    """Bessel evaluation over/underflows (large order at tiny argument)."""


class ResolventSetError(SpectralComputationError):
    """Spectral parameter lies on the spectrum of the unperturbed operator."""


class IterationError(SpectralComputationError):
    """Fixed-point iteration failed to converge."""

    def __init__(self, message: str, residuals: Sequence[float] = ()):
        super().__init__(message)
        self.residuals = list(residuals)


class EigenvalueSignal(SpectralComputationError):
    """Spectral parameter sits on an eigenvalue of the perturbed operator."""

    def __init__(self, message: str, z: Optional[complex] = None):
        super().__init__(message)
        self.z = z


class DirichletEigenvalueSignal(EigenvalueSignal):
    """f(z, 0) vanishes: z is a Dirichlet eigenvalue."""


class NeumannEigenvalueSignal(EigenvalueSignal):
    """f'(z, 0) vanishes: z is a Neumann eigenvalue."""


class ChannelTruncationError(SpectralComputationError):
    """Partial-wave or angular-mode product has not converged."""

    def __init__(self, message: str, last_increment: Optional[float] = None):
        super().__init__(message)
        self.last_increment = last_increment


class GridTooCoarseError(SpectralComputationError):
    """Phase increment between adjacent grid points is too large to unwrap."""


class SpectralPointError(SpectralComputationError):
    """Spectral parameter sits on a zero of the mode boundary function."""


class SpectralProximityError(SpectralComputationError):
    """Perturbed resolvent is numerically singular near the requested point."""


class RefineGridError(SpectralComputationError):
    """Phase-shift matching failed; a finer integration grid is needed."""
