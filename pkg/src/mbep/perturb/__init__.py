"""Splitting of multi-block EPs by quantum-jump perturbations."""

from .closed_form import (
    QutritSplitting,
    qubit_case_i_eigenvalues,
    qubit_case_ii_eigenvalues,
    qubit_critical_drives,
    qutrit_case_i_splitting,
    qutrit_case_ii_eigenvalues,
    qutrit_critical_drives,
)
from .newton import NewtonDiagram, NewtonSegment, newton_diagram
from .polynomial import GammaPolynomial, char_poly_in_gamma, preset_family, qutrit_case_i_cubic_factor
from .splitting import BranchFit, SplittingFit, splitting_exponent_fit, track_branches

__all__ = [
    "QutritSplitting",
    "qubit_case_i_eigenvalues",
    "qubit_case_ii_eigenvalues",
    "qubit_critical_drives",
    "qutrit_case_i_splitting",
    "qutrit_case_ii_eigenvalues",
    "qutrit_critical_drives",
    "NewtonDiagram",
    "NewtonSegment",
    "newton_diagram",
    "GammaPolynomial",
    "char_poly_in_gamma",
    "preset_family",
    "qutrit_case_i_cubic_factor",
    "BranchFit",
    "SplittingFit",
    "splitting_exponent_fit",
    "track_branches",
]
