"""Parameter sweeps producing per-point curve records.

Each sweep returns a flat list of :class:`CurveRecord`. Analytic records
come from :mod:`gpsm.analytic`; Monte Carlo records from
:func:`gpsm.harness.engine.simulate`, with every grid point of one curve
evaluated on the same random draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from ..analytic import SystemConfig, asymptotic_point, link_performance, mib, sd_only_performance
from ..channel import ChannelModel
from ..rxchain import PowerSplitConfig
from .engine import LinkSetup, TrialCounters, simulate, wilson_interval

__all__ = [
    "SweepSpec",
    "CurveRecord",
    "mc_record",
    "sweep_snr",
    "sweep_rho",
    "sweep_load_ratio",
    "LOAD_RATIO_RHOS",
]

SWEEP_KINDS = ("snr_b", "rho", "load_ratio")
MIN_MC_TRIALS = 1000
LOAD_RATIO_RHOS = (0.2, 0.4, 0.6, 0.8)


@dataclass(frozen=True)
class SweepSpec:
    """Grid and Monte Carlo budget of one sweep."""

    sweep_kind: str
    grid: tuple[float, ...]
    trials_per_point: int = 100_000
    seed: int = 0
    confidence: float = 0.95
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))
        if self.sweep_kind not in SWEEP_KINDS:
            raise ValueError(f"sweep_kind must be one of {SWEEP_KINDS}, got {self.sweep_kind!r}")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("grid must be strictly increasing")
        if any(not math.isfinite(g) for g in self.grid):
            raise ValueError("grid values must be finite")
        if self.sweep_kind != "load_ratio" and self.trials_per_point < MIN_MC_TRIALS:
            raise ValueError(f"trials_per_point must be >= {MIN_MC_TRIALS}, got {self.trials_per_point}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must lie in (0, 1)")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.sweep_kind == "rho" and any(not 0.0 <= g <= 1.0 for g in self.grid):
            raise ValueError("rho grid must lie in [0, 1]")
        if self.sweep_kind == "load_ratio" and any(not 0.0 < g < 1.0 for g in self.grid):
            raise ValueError("load ratios must lie in (0, 1)")


@dataclass(frozen=True)
class CurveRecord:
    """One point of one curve.

    ``n_a`` equal to ``n_r`` marks the conventional benchmark. Energy-only
    points (``rho = 1``) carry NaN in every rate field.
    """

    x: float
    source: str
    n_a: int
    e_s_ant: float
    e_b_eff: float
    mib: float
    rate: float
    q_normalized: float
    ci_halfwidth: float = 0.0
    trials: int = 0
    group: dict = field(default_factory=dict, compare=False)
    counters: TrialCounters | None = field(default=None, compare=False, repr=False)


def _nan_record(x, source, n_a, trials, group):
    nan = float("nan")
    return CurveRecord(x, source, n_a, nan, nan, nan, nan, 1.0, 0.0, trials, group)


def mc_record(
    x: float,
    counters: TrialCounters,
    setup: LinkSetup,
    confidence: float = 0.95,
    sd_only: bool = False,
    group: dict | None = None,
) -> CurveRecord:
    """Turn raw counters into rates, MIB, DCMC rate and a Wilson half-width on the BER."""
    n = counters.trials
    bits = setup.sd_bit_count if sd_only else setup.k_eff
    errors = counters.sd_bit_errors if sd_only else counters.bit_errors
    total_bits = n * bits
    e_b = errors / total_bits if total_bits else 0.0
    lo, hi = wilson_interval(errors, total_bits, confidence) if total_bits else (0.0, 0.0)
    info = mib(min(e_b, 0.5)) if total_bits else 0.0
    return CurveRecord(
        x=x,
        source="montecarlo",
        n_a=setup.n_a,
        e_s_ant=counters.sd_symbol_errors / n if n else 0.0,
        e_b_eff=e_b,
        mib=info,
        rate=bits * info,
        q_normalized=counters.q_normalized,
        ci_halfwidth=(hi - lo) / 2.0,
        trials=n,
        group=dict(group or {}),
        counters=counters,
    )


def _analytic_record(x, cfg: SystemConfig, sd_only: bool, group) -> CurveRecord:
    perf = sd_only_performance(cfg) if sd_only else link_performance(cfg)
    return CurveRecord(x, "analytic", cfg.n_a, perf.e_s_ant, perf.e_b_eff, perf.mib, perf.rate, perf.q_normalized, 0.0, 0, dict(group))


def _setup(cfg: SystemConfig, model: ChannelModel | None) -> LinkSetup:
    model = model or ChannelModel(n_t=cfg.n_t, n_r=cfg.n_r)
    if (model.n_t, model.n_r) != (cfg.n_t, cfg.n_r):
        raise ValueError("channel model and system config disagree on antenna counts")
    mode = "relaxed" if cfg.mode == "relaxed" else "strict"
    return LinkSetup(cfg.book, cfg.constellation, model, mode, cfg.xi)


def _n_a_list(template: SystemConfig, n_a_values, include_conventional):
    values = list(n_a_values) if n_a_values is not None else [template.n_a]
    if include_conventional and template.n_r not in values:
        values.append(template.n_r)
    return values


def sweep_snr(
    template: SystemConfig,
    spec: SweepSpec,
    n_a_values: Sequence[int] | None = None,
    include_conventional: bool = False,
    model: ChannelModel | None = None,
    sources: Iterable[str] = ("analytic", "montecarlo"),
) -> list[CurveRecord]:
    """BER/SER versus ``SNR_b`` in dB at the template's ``rho`` and ``alpha``."""
    if spec.sweep_kind != "snr_b":
        raise ValueError("sweep_snr needs an snr_b SweepSpec")
    sources = tuple(sources)
    records: list[CurveRecord] = []
    if not spec.grid:
        return records
    for n_a in _n_a_list(template, n_a_values, include_conventional):
        base = replace(template, n_a=n_a)
        group = {"rho": base.rho, "alpha": base.alpha}
        cfgs = [base.with_snr_b(x) for x in spec.grid]
        if "analytic" in sources:
            records.extend(_analytic_record(x, c, False, group) for x, c in zip(spec.grid, cfgs))
        if "montecarlo" in sources:
            setup = _setup(base, model)
            points = [PowerSplitConfig(c.rho, c.alpha, c.sigma2, c.xi) for c in cfgs]
            totals = simulate(setup, points, spec.trials_per_point, spec.seed, stream=n_a, workers=spec.workers)
            records.extend(mc_record(x, t, setup, spec.confidence, group=group) for x, t in zip(spec.grid, totals))
    return records


def sweep_rho(
    template: SystemConfig,
    spec: SweepSpec,
    snr_b_db: float = 0.0,
    n_a_values: Sequence[int] | None = None,
    include_conventional: bool = True,
    sd_only: bool = False,
    model: ChannelModel | None = None,
    sources: Iterable[str] = ("analytic", "montecarlo"),
) -> list[CurveRecord]:
    """MIB and DCMC rate versus the splitting ratio at fixed ``SNR_b``.

    ``q_normalized`` equals ``rho``. At ``rho = 1`` every source emits one
    energy-only record. ``sd_only`` restricts BER, MIB and rate to the
    pattern bits; the conventional benchmark has none and is skipped.
    """
    if spec.sweep_kind != "rho":
        raise ValueError("sweep_rho needs a rho SweepSpec")
    sources = tuple(sources)
    records: list[CurveRecord] = []
    if not spec.grid:
        return records
    values = _n_a_list(template, n_a_values, include_conventional and not sd_only)
    for n_a in values:
        base = replace(template, n_a=n_a).with_snr_b(snr_b_db)
        group = {"alpha": base.alpha, "snr_b_db": snr_b_db, "metric": "sd_only" if sd_only else "full"}
        live = [x for x in spec.grid if x < 1.0]
        if "analytic" in sources:
            for x in spec.grid:
                if x >= 1.0:
                    records.append(_nan_record(x, "analytic", n_a, 0, group))
                else:
                    records.append(_analytic_record(x, replace(base, rho=x), sd_only, group))
        if "montecarlo" in sources:
            setup = _setup(base, model)
            points = [PowerSplitConfig(x, base.alpha, base.sigma2, base.xi) for x in live]
            totals = simulate(setup, points, spec.trials_per_point, spec.seed, stream=n_a, workers=spec.workers)
            records.extend(mc_record(x, t, setup, spec.confidence, sd_only, group) for x, t in zip(live, totals))
            if len(live) < len(spec.grid):
                records.append(_nan_record(1.0, "montecarlo", n_a, 0, group))
    return records


def sweep_load_ratio(
    spec: SweepSpec,
    template: SystemConfig | None = None,
    snr_b_db: float = 0.0,
    n_a_values: Sequence[int | None] = (1, 2, None),
    rhos: Sequence[float] = LOAD_RATIO_RHOS,
) -> list[CurveRecord]:
    """Large-array analytic curves versus ``N_r / N_t``.

    ``None`` in ``n_a_values`` is the conventional scheme ``N_a = N_r``;
    its records carry ``n_a = 0`` since the value changes along the grid.
    """
    if spec.sweep_kind != "load_ratio":
        raise ValueError("sweep_load_ratio needs a load_ratio SweepSpec")
    template = template or SystemConfig(n_t=2048, n_r=1024, n_a=1, alpha=0.4)
    records: list[CurveRecord] = []
    for rho in rhos:
        cfg = replace(template, rho=rho)
        for n_a in n_a_values:
            group = {"rho": rho, "alpha": cfg.alpha, "snr_b_db": snr_b_db}
            for x in spec.grid:
                perf = asymptotic_point(x, n_a, cfg, snr_b_db)
                records.append(
                    CurveRecord(x, "analytic", 0 if n_a is None else n_a, perf.e_s_ant, perf.e_b_eff, perf.mib, perf.rate, rho, 0.0, 0, group)
                )
    return records
