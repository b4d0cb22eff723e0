"""Monte Carlo engine, parameter sweeps, CSV output, configuration and CLI."""

from .engine import BLOCK, LinkSetup, TrialCounters, run_trial, simulate, wilson_interval
from .sweeps import CurveRecord, SweepSpec, sweep_load_ratio, sweep_rho, sweep_snr

__all__ = [
    "BLOCK",
    "LinkSetup",
    "TrialCounters",
    "run_trial",
    "simulate",
    "wilson_interval",
    "CurveRecord",
    "SweepSpec",
    "sweep_snr",
    "sweep_rho",
    "sweep_load_ratio",
]
