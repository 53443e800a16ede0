"""Quantum metric of the effective Liouvillian along the drive axis.

The biorthogonal metric of each eigenmode diverges where two modes
coalesce.  With a quantum jump present the single EP of the jump-free
model splits into several critical drives; the scan locates them and fits
the local power law ``g ∝ |Ω - Ω_c|^(-p)``.

Run with ``python3 demos/metric_scan.py``.
"""

import numpy as np

from mbep.perturb import qutrit_critical_drives
from mbep.qgt import drive_family, metric_scan

GAMMA_H, GAMMA_E, JUMP = 0.8, 0.2, 0.3

family = drive_family("qutrit_ii", jump_rate=JUMP, gamma_h=GAMMA_H, gamma_e=GAMMA_E)
scan = metric_scan(family, np.arange(0.0005, 0.4, 1e-3), richardson=True, jobs=4)

print("closed-form critical drives:", np.round(qutrit_critical_drives(GAMMA_H, GAMMA_E, JUMP), 5))
for cp in scan.critical_points:
    print(f"Ω_c = {cp.omega:.5f}, power {cp.power:.2f}, modes {list(cp.modes)}")
