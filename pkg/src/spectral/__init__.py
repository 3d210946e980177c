"""
Spectral Module for bsdet-forge

Birman-Schwinger determinants of Schrodinger operators: the matrix model,
the half-line problem, radial scattering in two and three dimensions and the
unit disk, together with the potential library and ODE oracles.
"""

from src.spectral.abstract_bs import FactoredPerturbation, bs_eigen_correspondence, global_wa_check, krein_trace_check
from src.spectral.disk_domain import krein_disk_check, disk_determinant_ratio, mode_green, disk_boundary_product
from src.spectral.halfline import det_dirichlet, det_neumann, jost_solution, mfunctions
from src.spectral.potentials import Potential, build_potential
from src.spectral.scattering import det2_bs, partial_wave_det2, scattering_det, spectral_shift, trace_correction

__all__ = [
    "FactoredPerturbation",
    "bs_eigen_correspondence",
    "global_wa_check",
    "krein_trace_check",
    "krein_disk_check",
    "disk_determinant_ratio",
    "mode_green",
    "disk_boundary_product",
    "det_dirichlet",
    "det_neumann",
    "jost_solution",
    "mfunctions",
    "Potential",
    "build_potential",
    "det2_bs",
    "partial_wave_det2",
    "scattering_det",
    "spectral_shift",
    "trace_correction",
]
