"""
Numerics Module for bsdet-forge

Finite-dimensional determinant calculus, composite quadrature with Nystrom
assembly, and the special functions used by resolvent kernels.
"""

from src.numerics.detcore import (
    ContourSpec,
    LaurentData,
    det_fredholm,
    det_regularized,
    log_derivative_det,
    riesz_projection,
    winding_multiplicity,
)
from src.numerics.quadrature import (
    DiscretizedBSOperator,
    QuadratureRule,
    assemble_bs,
    assemble_bs_kinked,
    gauss_legendre,
    nystrom_refinement,
    panel_rule,
)
from src.numerics.specfun import SpectralParam, bessel_jy, hankel0_first, sqrt_up

__all__ = [
    "ContourSpec",
    "LaurentData",
    "det_fredholm",
    "det_regularized",
    "log_derivative_det",
    "riesz_projection",
    "winding_multiplicity",
    "DiscretizedBSOperator",
    "QuadratureRule",
    "assemble_bs",
    "assemble_bs_kinked",
    "gauss_legendre",
    "nystrom_refinement",
    "panel_rule",
    "SpectralParam",
    "bessel_jy",
    "hankel0_first",
    "sqrt_up",
]
