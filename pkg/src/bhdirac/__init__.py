"""Minimax spectra of the Dirac equation around a Schwarzschild black hole.

Units: hbar = m = c = 1, radii in Compton wavelengths, energies in mc^2.
"""

from bhdirac.basis import BasisSet, BasisSpec, Family, PhasedRadialFunction, build_basis
from bhdirac.assembly import MatrixPair, assemble, hermiticity_defect
from bhdirac.eigen import SpectrumResult, classify, generalized_eig
from bhdirac.minimax import (
    SaddleResult,
    convergence_table,
    find_saddle,
    rayleigh,
    spectrum,
)
from bhdirac.shooting import ShootingConfig, ShootingResult, find_energy, match_determinant

__all__ = [
    "BasisSet",
    "BasisSpec",
    "Family",
    "MatrixPair",
    "PhasedRadialFunction",
    "SaddleResult",
    "ShootingConfig",
    "ShootingResult",
    "SpectrumResult",
    "assemble",
    "build_basis",
    "classify",
    "convergence_table",
    "find_energy",
    "find_saddle",
    "generalized_eig",
    "hermiticity_defect",
    "match_determinant",
    "rayleigh",
    "spectrum",
]
