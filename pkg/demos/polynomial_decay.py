"""Population decay at a multi-block EP.

At an EP of order ``k`` the populations decay as ``e^{-rτ}`` times a
polynomial of degree ``k - 1``.  The script strips the exponential and fits
the remaining prefactor, for the qubit (third-order Liouvillian block) and
the qutrit (fifth-order block), with and without a quantum jump.

Run with ``python3 demos/polynomial_decay.py``.
"""

import numpy as np

from mbep.dynamics import evolve, prefactor_degree, projector_state, time_scale_for
from mbep.model import build_parts, preset

times = np.linspace(0.0, 60.0, 400)
cases = [
    ("qubit_i", dict(gamma_i=0.2, gamma_e=0.9)),
    ("qubit_ii", dict(gamma_i=0.2, gamma_e=0.9, jump_rate=0.3)),
    ("qutrit_ii", dict(gamma_h=0.4, gamma_e=0.2)),
    ("qutrit_ii", dict(gamma_h=0.4, gamma_e=0.2, jump_rate=0.3)),
]

for name, params in cases:
    spec = preset(name, **params)
    gen = build_parts(spec).lindbladian_eff
    table = evolve(gen, projector_state(spec.n_levels - 1, 0), times, time_scale=time_scale_for(spec))
    fit = prefactor_degree(table, 0)
    coeffs = np.array2string(np.asarray(fit.coefficients), precision=4)
    print(f"{name:9s} jump {params.get('jump_rate', 0.0):.1f}: rate {table.rate:.4f}, degree {fit.degree}, coefficients {coeffs}")
