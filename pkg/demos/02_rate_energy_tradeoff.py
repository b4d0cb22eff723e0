"""Rate against harvested energy as the power-splitting ratio moves from 0 to 1.

The pattern decision is made on the RF-side signal, so the spatial bits keep
their reliability while energy is diverted; only the symbol bits pay for it.
Run with ``python demos/02_rate_energy_tradeoff.py``.
"""

import math

import numpy as np

from gpsm import SystemConfig
from gpsm.harness import SweepSpec, sweep_rho

template = SystemConfig(alpha=0.4)
spec = SweepSpec("rho", tuple(np.round(np.arange(0.0, 1.01, 0.2), 12)), trials_per_point=20_000, seed=2)
records = sweep_rho(template, spec, snr_b_db=0.0, n_a_values=(2, 4), include_conventional=True)

print("n_a  source      rho   q_norm   rate (bits/super-symbol)")
for r in records:
    rate = "energy only" if math.isnan(r.rate) else f"{r.rate:.3f}"
    label = "conv" if r.n_a == template.n_r else str(r.n_a)
    print(f"{label:>4} {r.source:<11} {r.x:.1f}   {r.q_normalized:.3f}    {rate}")
