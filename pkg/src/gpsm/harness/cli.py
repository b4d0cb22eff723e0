"""Command-line entry point.

Subcommands: ``analytic``, ``simulate``, ``tradeoff``, ``asymptotic`` and
``selftest``. Exit status is 0 on success, 1 on a configuration error,
2 when a quadrature fails to converge and 3 when a self-test check fails.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, replace
from typing import Sequence

import numpy as np

from ..specfun import QuadratureError
from .config import PRESETS, ConfigError, RunConfig, load_config, preset
from .csvio import records_to_csv
from .sweeps import CurveRecord, sweep_load_ratio, sweep_rho, sweep_snr

__all__ = ["main", "build_parser", "run"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_SELFTEST = 0, 1, 2, 3

_DEFAULT_PRESET = {"analytic": "fig2", "simulate": "fig2", "tradeoff": "fig5", "asymptotic": "fig8"}
_ALLOWED_SWEEPS = {
    "analytic": ("snr_b", "rho", "load_ratio"),
    "simulate": ("snr_b", "rho"),
    "tradeoff": ("rho",),
    "asymptotic": ("load_ratio",),
}


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpsm", description="GPSM power-split link curves (CSV output).")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("analytic", "closed-form curves"),
        ("simulate", "Monte Carlo curves next to the closed-form ones"),
        ("tradeoff", "rate/energy trade-off over the splitting ratio"),
        ("asymptotic", "large-array curves over the load ratio"),
    ]:
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", metavar="PATH", help="TOML key-value configuration file")
        p.add_argument("--preset", metavar="NAME", help=f"one of {', '.join(sorted(PRESETS))}")
        p.add_argument("--out", metavar="PATH", help="CSV output path (default: stdout)")
        p.add_argument("--seed", type=_u64, metavar="U64")
        p.add_argument("--trials", type=_positive, metavar="N")
        p.add_argument("--workers", type=_positive, metavar="N")
    p = sub.add_parser("selftest", help="quick invariant checks")
    p.add_argument("--seed", type=_u64, default=0, metavar="U64")
    return parser


def _runs(args) -> list[RunConfig]:
    if args.config and args.preset:
        raise ConfigError("give --config or --preset, not both")
    if args.config:
        runs = [load_config(args.config)]
    else:
        runs = preset(args.preset or _DEFAULT_PRESET[args.command])
    overrides = {k: getattr(args, k) for k in ("seed", "trials", "workers") if getattr(args, k) is not None}
    runs = [replace(r, **overrides).validate() for r in runs]
    for r in runs:
        if r.sweep not in _ALLOWED_SWEEPS[args.command]:
            raise ConfigError(f"'{args.command}' cannot run a {r.sweep!r} sweep")
    return runs


def run(command: str, cfg: RunConfig) -> list[CurveRecord]:
    """Records for one configuration under one subcommand."""
    spec = cfg.sweep_spec()
    if cfg.sweep == "load_ratio":
        n_a_values = list(cfg.n_a) + ([None] if cfg.conventional else [])
        return sweep_load_ratio(spec, cfg.system(1), cfg.snr_b_db, n_a_values, cfg.rhos)
    sources = ("analytic",) if command == "analytic" else ("analytic", "montecarlo")
    model = cfg.channel()
    if model.correlated or model.sigma2_e > 0:
        # closed forms assume i.i.d. fading with perfect CSIT
        sources = tuple(s for s in sources if s != "analytic") or sources
    if cfg.sweep == "snr_b":
        return sweep_snr(cfg.system(), spec, cfg.n_a, cfg.conventional, model, sources)
    return sweep_rho(cfg.system(), spec, cfg.snr_b_db, cfg.n_a, cfg.conventional, cfg.sd_only, model, sources)


def _metadata(command: str, cfg: RunConfig) -> list[str]:
    items = {k: v for k, v in asdict(cfg).items() if k != "workers"}
    return [f"command={command}", "config " + " ".join(f"{k}={v}" for k, v in items.items())]


def _selftest(seed: int) -> int:
    from ..analytic import SystemConfig, delta_correction, mib
    from ..channel import ChannelModel
    from ..rxchain import PowerSplitConfig
    from ..specfun import integrate_semi_infinite, lambda_pdf
    from ..txchain import build_pattern_book, ci_precoder, make_constellation
    from .engine import LinkSetup, block_rng, draw_block, simulate

    checks = []
    keff = [SystemConfig(n_a=n).k_eff for n in (1, 2, 3, 4, 5, 6, 8)]
    checks.append(("throughput table", keff == [5, 8, 11, 14, 15, 16, 16]))
    checks.append(("delta closed form", all(delta_correction(k) * (2**k - 1) == k * 2 ** (k - 1) for k in range(1, 13))))
    h = ChannelModel().draw(np.random.default_rng(seed)).h_known
    checks.append(("channel inversion", np.allclose(h @ ci_precoder(h).p, np.eye(8), atol=1e-10)))
    mass = integrate_semi_infinite(lambda x: lambda_pdf(x, 16, 8, 2, 0.5), breakpoints=(9.0,))
    checks.append(("lambda law normalisation", abs(mass - 1.0) < 1e-9))
    checks.append(("mib endpoints", mib(0.0) == 1.0 and mib(0.5) == 0.0))
    setup = LinkSetup(build_pattern_book(8, 2), make_constellation("qpsk"), ChannelModel())
    blk = draw_block(setup, block_rng(seed, 0, 0), 512)
    from ..rxchain import detect_pattern

    decisions = [
        detect_pattern(np.sqrt(1 - r) * (blk.received + np.sqrt(0.2) * blk.w_a), setup.book) for r in np.arange(10) / 10
    ]
    checks.append(("pattern decisions independent of rho", all(np.array_equal(decisions[0], d) for d in decisions)))
    points = [PowerSplitConfig(0.0, 1.0, 0.0)]
    checks.append(("noiseless link is error free", simulate(setup, points, 1000, seed)[0].bit_errors == 0))
    ok = True
    for name, passed in checks:
        print(f"{'PASS' if passed else 'FAIL'}  {name}")
        ok &= bool(passed)
    return EXIT_OK if ok else EXIT_SELFTEST


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "selftest":
        return _selftest(args.seed)
    try:
        runs = _runs(args)
        records: list[CurveRecord] = []
        metadata: list[str] = []
        for cfg in runs:
            records.extend(run(args.command, cfg))
            metadata.extend(_metadata(args.command, cfg))
    except ConfigError as exc:
        print(f"gpsm: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureError as exc:
        print(f"gpsm: numerical integration failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = records_to_csv(records, metadata)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
