"""Large-array rate as the receive array fills up the transmit array.

Uses the deterministic large-system expressions, so it runs in seconds.
Run with ``python demos/03_large_array_limit.py``.
"""

import numpy as np

from gpsm import SystemConfig
from gpsm.harness import SweepSpec, sweep_load_ratio

ratios = tuple(np.round(np.linspace(0.1, 0.9, 9), 12))
records = sweep_load_ratio(SweepSpec("load_ratio", ratios, 0), SystemConfig(n_t=2048, n_r=1024, n_a=1, alpha=0.4), rhos=(0.4,))

by_scheme = {}
for r in records:
    by_scheme.setdefault(r.n_a, []).append(r.rate / 2048)

print("N_r/N_t   conv     N_a=1    N_a=2   (rate per transmit antenna)")
for i, x in enumerate(ratios):
    print(f"  {x:.1f}    {by_scheme[0][i]:.4f}   {by_scheme[1][i]:.4f}   {by_scheme[2][i]:.4f}")
