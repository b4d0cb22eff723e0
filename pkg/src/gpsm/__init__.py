"""Generalised precoded spatial modulation with a power-split receiver.

Submodules
----------
specfun   special functions and adaptive semi-infinite quadrature
channel   Rayleigh fading, Kronecker correlation and CSIT error
txchain   pattern book, constellations, bit mapping, channel-inversion precoding
rxchain   power split, energy harvesting, pattern and symbol detection
analytic  closed-form error rates, MIB and DCMC rate
harness   Monte Carlo engine, sweeps, CSV output and command line
"""

from .analytic import SystemConfig, link_performance, sd_only_performance, asymptotic_point
from .channel import ChannelModel
from .rxchain import PowerSplitConfig
from .txchain import build_pattern_book, make_constellation

__all__ = [
    "SystemConfig",
    "ChannelModel",
    "PowerSplitConfig",
    "build_pattern_book",
    "make_constellation",
    "link_performance",
    "sd_only_performance",
    "asymptotic_point",
]

__version__ = "0.1.0"
