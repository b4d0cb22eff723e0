"""Throughput per super-symbol and the closed-form BER against a short simulation.

Run with ``python demos/01_throughput_and_ber.py``.
"""

import numpy as np

from gpsm import SystemConfig, link_performance
from gpsm.harness import LinkSetup, simulate
from gpsm.channel import ChannelModel
from gpsm.rxchain import PowerSplitConfig

# bits carried by the pattern index and by the QPSK symbols, {N_t, N_r} = {16, 8}
print("N_a  k_ant  k_eff")
for n_a in (1, 2, 3, 4, 5, 6, 8):
    cfg = SystemConfig(n_a=n_a)
    print(f"{n_a:>3}  {cfg.k_ant:>5}  {cfg.k_eff:>5}")

# no power splitting: all noise sits before the detector
n_a = 4
grid = np.arange(-4.0, 8.1, 2.0)
cfgs = [SystemConfig(n_a=n_a).with_snr_b(x) for x in grid]
setup = LinkSetup(cfgs[0].book, cfgs[0].constellation, ChannelModel())
totals = simulate(setup, [PowerSplitConfig(c.rho, c.alpha, c.sigma2) for c in cfgs], 50_000, seed=1)

print(f"\nN_a = {n_a}: SNR_b   analytic BER   simulated BER")
for x, cfg, c in zip(grid, cfgs, totals):
    ber = c.bit_errors / (c.trials * cfg.k_eff)
    print(f"        {x:+5.1f}   {link_performance(cfg).e_b_eff:.3e}      {ber:.3e}")
