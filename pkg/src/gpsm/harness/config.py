"""Run configuration: a flat TOML key-value file plus named presets.

Recognised keys (all optional)::

    n_t = 16                 # transmit antennas
    n_r = 8                  # receive antennas
    n_a = [1, 2, 4]          # active receive antennas, int or list
    conventional = false     # also run the N_a = N_r benchmark
    modulation = "qpsk"      # bpsk, qpsk, 8psk, 16qam, ...
    normalization = "strict" # or "relaxed"
    rho = 0.0                # power-splitting ratio (SNR sweeps)
    alpha = 1.0              # RF share of the receiver noise
    xi = 1.0                 # energy conversion efficiency
    sweep = "snr_b"          # snr_b | rho | load_ratio
    grid = [-10.0, -8.0]     # sweep grid, or grid_start/grid_stop/grid_step
    snr_b_db = 0.0           # fixed SNR_b for rho and load_ratio sweeps
    sd_only = false          # rho sweeps: pattern bits only
    rhos = [0.2, 0.4]        # load_ratio sweeps: splitting ratios
    trials = 100000          # Monte Carlo trials per grid point
    seed = 0
    confidence = 0.95
    workers = 1
    sigma_e = 0.0            # CSIT error standard deviation
    rho_t = 0.0              # transmit correlation coefficient
    rho_r = 0.0              # receive correlation coefficient

Unknown keys are rejected by name.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..analytic import SystemConfig
from ..channel import ChannelModel
from .sweeps import LOAD_RATIO_RHOS, SweepSpec

__all__ = ["ConfigError", "RunConfig", "PRESETS", "load_config", "parse_config", "preset", "arange_grid"]


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


def arange_grid(start: float, stop: float, step: float) -> tuple[float, ...]:
    """Inclusive grid ``start, start + step, ..., stop`` rounded to 12 digits."""
    if step <= 0:
        raise ConfigError("grid_step must be > 0")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 12) for i in range(max(n, 0)))


@dataclass(frozen=True)
class RunConfig:
    n_t: int = 16
    n_r: int = 8
    n_a: tuple[int, ...] = (2,)
    conventional: bool = False
    modulation: str = "qpsk"
    normalization: str = "strict"
    rho: float = 0.0
    alpha: float = 1.0
    xi: float = 1.0
    sweep: str = "snr_b"
    grid: tuple[float, ...] = ()
    snr_b_db: float = 0.0
    sd_only: bool = False
    rhos: tuple[float, ...] = LOAD_RATIO_RHOS
    trials: int = 100_000
    seed: int = 0
    confidence: float = 0.95
    workers: int = 1
    sigma_e: float = 0.0
    rho_t: float = 0.0
    rho_r: float = 0.0

    def system(self, n_a: int | None = None) -> SystemConfig:
        mode = "relaxed" if self.normalization == "relaxed" else "strict"
        return SystemConfig(
            n_t=self.n_t, n_r=self.n_r, n_a=self.n_a[0] if n_a is None else n_a, modulation=self.modulation,
            rho=self.rho, alpha=self.alpha, mode=mode, xi=self.xi,
        )

    def channel(self) -> ChannelModel:
        return ChannelModel(n_t=self.n_t, n_r=self.n_r, rho_t=self.rho_t, rho_r=self.rho_r, sigma2_e=self.sigma_e**2)

    def sweep_spec(self) -> SweepSpec:
        return SweepSpec(self.sweep, self.grid, self.trials, self.seed, self.confidence, self.workers)

    def validate(self) -> "RunConfig":
        """Build every derived object once so that errors surface as :class:`ConfigError`."""
        try:
            if self.normalization not in ("strict", "relaxed"):
                raise ValueError(f"normalization must be 'strict' or 'relaxed', got {self.normalization!r}")
            if not self.n_a:
                raise ValueError("n_a must not be empty")
            if self.sweep != "load_ratio":
                for n_a in self.n_a:
                    self.system(n_a).constellation
                self.channel()
            else:
                self.system(1).constellation
            self.sweep_spec()
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_GRID_KEYS = ("grid_start", "grid_stop", "grid_step")


def _coerce(key: str, value: Any):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "bool":
            if not isinstance(value, bool):
                raise TypeError
            return value
        if kind == "int":
            if isinstance(value, bool) or not isinstance(value, int):
                raise TypeError
            return value
        if kind == "float":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeError
            return float(value)
        if kind == "str":
            if not isinstance(value, str):
                raise TypeError
            return value
        if kind == "tuple[int, ...]":
            items = value if isinstance(value, list) else [value]
            if any(isinstance(v, bool) or not isinstance(v, int) for v in items):
                raise TypeError
            return tuple(items)
        if kind == "tuple[float, ...]":
            items = value if isinstance(value, list) else [value]
            if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in items):
                raise TypeError
            return tuple(float(v) for v in items)
    except TypeError:
        raise ConfigError(f"key {key!r}: expected {kind}, got {value!r}") from None
    raise AssertionError(kind)


def parse_config(data: dict, base: RunConfig | None = None) -> RunConfig:
    """Apply a key-value mapping on top of ``base`` (defaults if omitted)."""
    unknown = sorted(set(data) - set(_FIELD_TYPES) - set(_GRID_KEYS))
    if unknown:
        raise ConfigError(f"unknown configuration key {unknown[0]!r}")
    values = {k: _coerce(k, v) for k, v in data.items() if k in _FIELD_TYPES}
    grid_parts = [k for k in _GRID_KEYS if k in data]
    if grid_parts:
        if len(grid_parts) != 3:
            raise ConfigError("grid_start, grid_stop and grid_step must be given together")
        if "grid" in data:
            raise ConfigError("give either grid or grid_start/grid_stop/grid_step, not both")
        parts = []
        for k in _GRID_KEYS:
            v = data[k]
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"key {k!r}: expected float, got {v!r}")
            parts.append(float(v))
        values["grid"] = arange_grid(*parts)
    return replace(base or RunConfig(), **values)


def load_config(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return parse_config(data, base)


_RHO_GRID = arange_grid(0.0, 1.0, 0.1)
_TRADEOFF = dict(sweep="rho", grid=_RHO_GRID, snr_b_db=0.0, trials=100_000)

PRESETS: dict[str, tuple[dict, ...]] = {
    "fig2": (dict(n_a=[1, 2, 4], rho=0.0, alpha=1.0, sweep="snr_b", grid=list(arange_grid(-10.0, 12.0, 2.0)), trials=1_000_000),),
    "fig3": (
        dict(n_a=[1, 2, 3, 4, 5, 6], conventional=True, rho=0.5, alpha=0.4, sweep="snr_b",
             grid=list(arange_grid(-6.0, 16.0, 2.0)), trials=1_000_000),
    ),
    "fig4": tuple(dict(_TRADEOFF, n_a=[1, 2, 3, 4, 5, 6], sd_only=True, alpha=a) for a in (0.4, 0.6)),
    "fig5": tuple(dict(_TRADEOFF, n_a=[1, 2, 3, 4, 5, 6], conventional=True, alpha=a) for a in (0.4, 0.6)),
    "fig6": tuple(dict(_TRADEOFF, n_a=[1, 2, 3, 4, 5, 6], conventional=True, alpha=a) for a in (0.4, 0.6)),
    "fig7": (
        dict(_TRADEOFF, n_a=[2, 4, 6], conventional=True, alpha=0.4, sigma_e=0.2),
        dict(_TRADEOFF, n_a=[2, 4, 6], conventional=True, alpha=0.4, rho_t=0.4, rho_r=0.4),
    ),
    "fig8": (
        dict(n_t=2048, n_r=1024, n_a=[1, 2], conventional=True, alpha=0.4, sweep="load_ratio", snr_b_db=0.0,
             rhos=[0.2, 0.4, 0.6, 0.8], grid=[n / 2048 for n in list(range(64, 2046, 32)) + [2046]]),
    ),
}
PRESETS = {k: tuple({key: (list(v) if isinstance(v, tuple) else v) for key, v in d.items()} for d in runs)
           for k, runs in PRESETS.items()}


def preset(name: str) -> list[RunConfig]:
    """Runs making up a preset; most presets are a single run, split panels give several."""
    try:
        runs = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}") from None
    return [parse_config(d) for d in runs]
