"""Exact Newton diagram for the jump-perturbed three-level EP.

The characteristic polynomial of the effective Liouvillian is computed in
exact rational arithmetic as a polynomial in the shift ``λ`` and the jump
rate ``Γ``.  Three of the nine branches belong to an explicit cubic factor
(two going as ``Γ^(1/2)`` and one as ``Γ``), which is divided out first.
The lower convex hull of the remainder predicts the rest: five branches go
as ``Γ^(1/5)`` and one as ``Γ``.

Run with ``python3 demos/qutrit_newton_diagram.py``.
"""

from fractions import Fraction

import numpy as np

from mbep.perturb import (
    char_poly_in_gamma,
    newton_diagram,
    preset_family,
    qutrit_case_i_cubic_factor,
    splitting_exponent_fit,
)

gh, ge = Fraction(2, 5), Fraction(1, 5)
gamma_i = (gh + ge) / 2

p = char_poly_in_gamma(preset_family("qutrit_i", gamma_h=gh, gamma_e=ge), omega_squared=(gh - ge) ** 2 / 32)
p = p.shift(-gamma_i).exact_divide(qutrit_case_i_cubic_factor(gh, ge))
diagram = newton_diagram(p)

print("diagram points (power of λ, lowest power of Γ):", diagram.points)
for seg in diagram.segments:
    roots = ", ".join(f"{complex(r):.4f}" for r in seg.roots())
    print(f"slope {seg.slope} x{seg.span}: λ ≈ μ Γ^{seg.slope}, μ in [{roots}]")

# compare with numerically tracked branches
family = preset_family("qutrit_i", exact=False, gamma_h=float(gh), gamma_e=float(ge))
fit = splitting_exponent_fit(family, np.logspace(-8, -4, 12), -float(gamma_i))
print("fitted exponents:", np.round(np.sort(fit.exponents()), 3))
