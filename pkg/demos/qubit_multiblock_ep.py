"""A driven two-level system at its exceptional point.

The effective Hamiltonian of the excited manifold has a single 2x2 Jordan
block.  Lifting it to the Liouvillian ``H ⊗ 1 + 1 ⊗ H*`` produces a 3x3
and a 1x1 block at the same eigenvalue.  A weak quantum jump then splits
the degenerate quartet as ``Γ^(1/3)`` for three branches and ``Γ`` for the
fourth.

Run with ``python3 demos/qubit_multiblock_ep.py``.
"""

import numpy as np

from mbep.jordan import detect_structure, predict_kron_sum_blocks
from mbep.model import build_parts, preset, qubit_ep_parameters
from mbep.perturb import preset_family, splitting_exponent_fit

GAMMA_I, GAMMA_E = 0.2, 0.9

omega, lam = qubit_ep_parameters(GAMMA_I, GAMMA_E)
print(f"EP drive {omega:.4f}, Hamiltonian eigenvalue {lam:.4f}")

parts = build_parts(preset("qubit_i", gamma_i=GAMMA_I, gamma_e=GAMMA_E))
(h_block,) = detect_structure(parts.h_eff)
print(f"H_eff:     eigenvalue {h_block.eigenvalue:.4f}, blocks {h_block.segre}")

blocks = [(size, h_block.eigenvalue) for size in h_block.segre]
for s in predict_kron_sum_blocks(blocks, blocks, cluster_tol=1e-6):
    print(f"predicted: eigenvalue {s.eigenvalue:.4f}, blocks {s.segre}")
found = detect_structure(parts.lindbladian_eff)
for s in found:
    print(f"L_eff:     eigenvalue {s.eigenvalue:.4f}, blocks {s.segre}")

# splitting of the quartet under a weak jump
family = preset_family("qubit_i", exact=False, gamma_i=GAMMA_I, gamma_e=GAMMA_E, omega=omega)
fit = splitting_exponent_fit(family, np.logspace(-8, -4, 12), found[0].eigenvalue)
print("splitting exponents:", np.round(np.sort(fit.exponents()), 3))
