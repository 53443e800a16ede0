"""Closed-form spectra of the four jump-perturbed model families.

All radicals use principal branches (``numpy.sqrt`` and ``** (1/3)`` on
complex arguments).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "qubit_case_i_eigenvalues",
    "qubit_case_ii_eigenvalues",
    "qutrit_case_ii_eigenvalues",
    "qutrit_case_i_splitting",
    "QutritSplitting",
    "qubit_critical_drives",
    "qutrit_critical_drives",
]

_XI = np.exp(2j * np.pi / 3)


def _check_rates(**rates):
    for name, value in rates.items():
        if not np.isfinite(value):
            raise ValueError(f"{name} must be finite")
        if value < 0:
            raise ValueError(f"{name} must be non-negative, got {value}")


def qubit_case_i_eigenvalues(gamma_i, gamma_e, omega, Gamma) -> np.ndarray:
    """Spectrum of the qubit effective Lindbladian with the ``|e><i|`` jump.

    Three roots come from Cardano's formula for the depressed cubic
    ``x^3 - (κ/4) x - 2ν = 0`` with ``ν = ΓΩ²`` and
    ``κ = (Γ + γ_i - γ_e)² - 16Ω²``; the fourth is ``-(Γ + γ_e + γ_i)/2``.
    """
    _check_rates(gamma_i=gamma_i, gamma_e=gamma_e, Gamma=Gamma)
    shift = -(gamma_i + gamma_e + Gamma) / 2
    nu = Gamma * omega**2
    p = ((Gamma + gamma_i - gamma_e) ** 2 - 16 * omega**2) / 12
    u3 = nu + np.sqrt(complex(nu**2 - p**3))
    u = u3 ** (1 / 3) if u3 != 0 else 0j
    roots = []
    for k in range(3):
        uk = _XI**k * u
        roots.append(shift + (uk + p / uk if uk != 0 else 0j))
    roots.append(complex(shift))
    return np.array(roots)


def qubit_case_ii_eigenvalues(gamma_i, gamma_e, omega, Gamma) -> np.ndarray:
    """Spectrum of the qubit effective Lindbladian with the ``σ_y`` jump."""
    _check_rates(gamma_i=gamma_i, gamma_e=gamma_e, Gamma=Gamma)
    s = gamma_i + gamma_e
    root = np.sqrt(complex(4 * Gamma**2 + (gamma_i - gamma_e) ** 2 - 16 * omega**2))
    return np.array(
        [-s / 2, (-(2 * Gamma + s) + root) / 2, (-(2 * Gamma + s) - root) / 2, -(4 * Gamma + s) / 2],
        dtype=complex,
    )


def qutrit_case_ii_eigenvalues(gamma_h, gamma_e, omega, Gamma) -> np.ndarray:
    """Spectrum of the qutrit effective Lindbladian with the dephasing jump.

    The middle decay rate is fixed to ``γ_i = (γ_h + γ_e)/2``.
    """
    _check_rates(gamma_h=gamma_h, gamma_e=gamma_e, Gamma=Gamma)
    gi = (gamma_h + gamma_e) / 2
    gt2 = ((gamma_h - gamma_e) / 2) ** 2
    r1 = np.sqrt(complex(Gamma**2 + gt2 - 8 * omega**2))
    r2 = np.sqrt(complex(4 * Gamma**2 + gt2 - 8 * omega**2)) / 2
    base = -Gamma - gi
    return np.array(
        [-gi, -gi, -2 * Gamma - gi, base - r1, base + r1, base - r2, base - r2, base + r2, base + r2],
        dtype=complex,
    )


@dataclass(frozen=True)
class QutritSplitting:
    """Leading-order fate of the qutrit [5, 3, 1] EP under the case (i) jumps.

    ``ring`` holds the five ``Γ^(1/5)`` branches, ``exact`` the three roots
    of the cubic factor (exact for all Γ), ``shifted`` the linearly moving
    simple eigenvalue.
    """

    center: float
    ring: np.ndarray
    exact: np.ndarray
    shifted: complex

    def eigenvalues(self) -> np.ndarray:
        return np.concatenate([self.ring, self.exact, [self.shifted]])


def qutrit_case_i_splitting(gamma_h, gamma_e, Gamma) -> QutritSplitting:
    """Leading-order splitting of the qutrit EP by the three downward jumps."""
    if Gamma < 0:
        raise ValueError("Gamma must be non-negative")
    _check_rates(gamma_h=gamma_h, gamma_e=gamma_e)
    center = -(gamma_h + gamma_e) / 2
    d = gamma_h - gamma_e
    radius = (15 * d**4 / 512) ** 0.2 * Gamma**0.2
    ring = center + radius * np.exp(2j * np.pi * np.arange(1, 6) / 5)
    root = np.sqrt(complex(Gamma * (Gamma + d))) / 2
    exact = np.array([center - Gamma, center - Gamma + root, center - Gamma - root])
    return QutritSplitting(center, ring, exact, complex(center - 16 * Gamma / 15))


def qubit_critical_drives(gamma_i, gamma_e, Gamma) -> tuple[float, float]:
    """Drives of the jump-free EP and of the σ_y-perturbed EP (qubit)."""
    d2 = (gamma_i - gamma_e) ** 2
    return math.sqrt(d2) / 4, math.sqrt(4 * Gamma**2 + d2) / 4


def qutrit_critical_drives(gamma_h, gamma_e, Gamma) -> tuple[float, float, float]:
    """Jump-free EP drive and the two dephasing-induced EP drives (qutrit)."""
    gt2 = ((gamma_h - gamma_e) / 2) ** 2
    s = 2 * math.sqrt(2)
    return math.sqrt(gt2) / s, math.sqrt(Gamma**2 + gt2) / s, math.sqrt(4 * Gamma**2 + gt2) / s
