"""Vectorised Monte Carlo engine.

Trials are grouped in fixed-size blocks. Block ``b`` of stream ``s`` draws
from its own Philox substream keyed by ``(seed, s, b)``, so results do not
depend on how blocks are spread over workers. Within a block the channel,
bits and unit-variance noise are drawn once and shared by every operating
point (noise level, power split) evaluated on it.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Sequence

import numpy as np

from ..channel import ChannelModel
from ..rxchain import PowerSplitConfig, detect, detect_pattern, detect_symbols, harvest, receive
from ..txchain import Constellation, PatternBook, beta_strict, ci_precoder, map_bits, transmit

__all__ = [
    "BLOCK",
    "TrialCounters",
    "LinkSetup",
    "block_rng",
    "run_trial",
    "simulate",
    "simulate_block",
    "draw_block",
    "wilson_interval",
]

BLOCK = 8192
ENERGY_UNIT = 2.0**-32  # fixed-point step for the harvested-energy counter
SINGULAR_SV = 1e-10


@dataclass
class TrialCounters:
    """Additive error and energy tallies for one operating point.

    ``harvested_fixed`` counts harvested energy in units of ``2**-32`` so
    that merging is exact in any order.
    """

    trials: int = 0
    sd_symbol_errors: int = 0
    mod_symbol_errors: int = 0
    bit_errors: int = 0
    sd_bit_errors: int = 0
    mod_bit_errors: int = 0
    trials_sd_ok: int = 0
    mod_symbol_errors_sd_ok: int = 0
    mod_bit_errors_sd_ok: int = 0
    harvested_fixed: int = 0
    received_fixed: int = 0
    regenerated_channels: int = 0

    def __add__(self, other: "TrialCounters") -> "TrialCounters":
        return TrialCounters(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))

    @property
    def harvested_sum(self) -> float:
        return self.harvested_fixed * ENERGY_UNIT

    @property
    def q_normalized(self) -> float:
        """Harvested energy over the noiseless received energy, i.e. ``xi * rho``."""
        return self.harvested_fixed / self.received_fixed if self.received_fixed else 0.0


@dataclass(frozen=True)
class LinkSetup:
    """Everything about a link that is fixed across operating points."""

    book: PatternBook
    constellation: Constellation
    model: ChannelModel
    normalization: str = "strict"
    xi: float = 1.0

    def __post_init__(self):
        if self.model.n_r != self.book.n_r:
            raise ValueError("channel and pattern book disagree on N_r")
        if self.normalization not in ("strict", "relaxed"):
            raise ValueError(f"unknown normalization {self.normalization!r}")

    @property
    def n_a(self) -> int:
        return self.book.n_a

    @property
    def k_eff(self) -> int:
        return self.book.k_ant + self.book.n_a * self.constellation.k_mod

    @property
    def sd_bit_count(self) -> int:
        return self.book.k_ant

    @property
    def mod_bit_count(self) -> int:
        return self.book.n_a * self.constellation.k_mod


def block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream), int(block)))
    return np.random.Generator(np.random.Philox(ss))


def _unit_cn(rng, shape):
    return rng.standard_normal(tuple(shape) + (2,)).view(np.complex128)[..., 0] * math.sqrt(0.5)


def _popcount(a: np.ndarray) -> np.ndarray:
    a = a.astype(np.uint64)
    count = np.zeros(a.shape, dtype=np.int64)
    while np.any(a):
        count += (a & np.uint64(1)).astype(np.int64)
        a >>= np.uint64(1)
    return count


def _screen(gram: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Boolean mask of channels ``h`` with ``sigma_min < 1e-10``.

    A cheap determinant bound on the Gram matrix clears almost every draw;
    the rest get an SVD of ``h`` itself, since eigenvalues of the Gram
    matrix cannot resolve singular values this small.
    """
    n = gram.shape[-1]
    bad = np.zeros(gram.shape[0], dtype=bool)
    sign, logdet = np.linalg.slogdet(gram)
    trace = np.trace(gram, axis1=-2, axis2=-1).real
    # lambda_min >= det / lambda_max**(n-1) >= det / trace**(n-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        lower = logdet - (n - 1) * np.log(trace)
    unsure = ~(np.isfinite(lower) & (sign.real > 0) & (lower > 2 * math.log(SINGULAR_SV)))
    if np.any(unsure):
        sv_min = np.linalg.svd(h[unsure], compute_uv=False)[:, -1]
        bad[unsure] = ~(sv_min >= SINGULAR_SV)
    return bad


@dataclass
class Block:
    """Shared draws of one block: channel, transmitted signal, unit noise."""

    k: np.ndarray
    labels: np.ndarray
    beta: np.ndarray
    received: np.ndarray  # noiseless H_true x
    w_a: np.ndarray
    w_b: np.ndarray
    regenerated: int = 0
    x: np.ndarray | None = field(default=None, repr=False)


def _draw_channels(setup: LinkSetup, rng, n):
    """Channel pairs and Gram matrices for ``n`` trials, regenerating near-singular draws."""
    real = setup.model.draw(rng, (n,))
    h_true, h_known = real.h_true, real.h_known
    gram = h_known @ h_known.conj().swapaxes(-1, -2)
    bad = _screen(gram, h_known)
    regenerated = 0
    shared = h_known is h_true
    while np.any(bad):
        idx = np.flatnonzero(bad)
        regenerated += idx.size
        fresh = setup.model.draw(rng, (idx.size,))
        h_true = h_true.copy()
        h_known = h_true if shared else h_known.copy()
        h_true[idx] = fresh.h_true
        h_known[idx] = fresh.h_known
        gram[idx] = fresh.h_known @ fresh.h_known.conj().swapaxes(-1, -2)
        bad = np.zeros_like(bad)
        bad[idx] = _screen(gram[idx], h_known[idx])
    return h_true, h_known, gram, regenerated


def draw_block(setup: LinkSetup, rng: np.random.Generator, n: int, keep_x: bool = False) -> Block:
    book, const = setup.book, setup.constellation
    n_r, n_a = book.n_r, book.n_a
    h_true, h_known, gram, regenerated = _draw_channels(setup, rng, n)
    k = rng.integers(0, book.size, size=n)
    labels = rng.integers(0, const.order, size=(n, n_a))
    s = np.zeros((n, n_r), dtype=complex)
    np.put_along_axis(s, book.index_array[k], const.points[labels], axis=1)
    z = np.linalg.solve(gram, s[..., None])[..., 0]
    if setup.normalization == "strict":
        beta = n_a / np.einsum("bi,bi->b", s.conj(), z).real
    else:
        inv_trace = np.trace(np.linalg.inv(gram), axis1=-2, axis2=-1).real
        beta = n_r / inv_trace
    x = np.sqrt(beta / n_a)[:, None] * np.einsum("bij,bi->bj", h_known.conj(), z)
    received = np.einsum("bij,bj->bi", h_true, x)
    w_a = _unit_cn(rng, (n, n_r))
    w_b = _unit_cn(rng, (n, n_r))
    return Block(k, labels, beta, received, w_a, w_b, regenerated, x if keep_x else None)


def evaluate_block(setup: LinkSetup, blk: Block, point: PowerSplitConfig) -> TrialCounters:
    """Detect and tally one operating point on a drawn block."""
    n = blk.k.size
    # every point shares the block's channels, so each reports the same regeneration count
    counters = TrialCounters(trials=n, regenerated_channels=blk.regenerated)
    power = np.sum(np.abs(blk.received) ** 2, axis=-1)
    counters.received_fixed = int(np.rint(setup.xi * power / ENERGY_UNIT).astype(np.int64).sum())
    q = setup.xi * point.rho * power
    counters.harvested_fixed = int(np.rint(q / ENERGY_UNIT).astype(np.int64).sum())
    if not point.detects:
        return counters
    book = setup.book
    y_a = math.sqrt(1.0 - point.rho) * (blk.received + math.sqrt(point.sigma2_a) * blk.w_a)
    y_b = y_a + math.sqrt(point.sigma2_b) * blk.w_b
    k_hat = detect_pattern(y_a, book)
    m_hat = detect_symbols(y_b, k_hat, blk.beta, point, setup.constellation, book)
    sd_ok = k_hat == blk.k
    sym_err = m_hat != blk.labels
    sd_bits = _popcount(blk.k ^ k_hat)
    mod_bits = _popcount(blk.labels ^ m_hat).sum(axis=-1)
    counters.sd_symbol_errors = int(np.count_nonzero(~sd_ok))
    counters.mod_symbol_errors = int(np.count_nonzero(sym_err))
    counters.sd_bit_errors = int(sd_bits.sum())
    counters.mod_bit_errors = int(mod_bits.sum())
    counters.bit_errors = counters.sd_bit_errors + counters.mod_bit_errors
    counters.trials_sd_ok = int(np.count_nonzero(sd_ok))
    counters.mod_symbol_errors_sd_ok = int(np.count_nonzero(sym_err[sd_ok]))
    counters.mod_bit_errors_sd_ok = int(mod_bits[sd_ok].sum())
    return counters


def run_trial(
    cfg: PowerSplitConfig,
    book: PatternBook,
    constellation: Constellation,
    model: ChannelModel,
    rng: np.random.Generator,
    normalization: str = "strict",
) -> TrialCounters:
    """One super-symbol through the scalar chain, tallied as a counter delta.

    This walks the single-trial API (precoder object, ``receive``, ``detect``)
    and serves as a readable reference for the vectorised block path.
    """
    if not cfg.detects:
        raise ValueError("rho = 1: nothing to detect")
    counters = TrialCounters(trials=1)
    while True:
        real = model.draw(rng)
        if np.linalg.svd(real.h_known, compute_uv=False)[-1] >= SINGULAR_SV:
            break
        counters.regenerated_channels += 1
    n_bits = book.k_ant + book.n_a * constellation.k_mod
    bits = rng.integers(0, 2, size=n_bits)
    s = map_bits(bits, book, constellation)
    precoder = ci_precoder(real.h_known, mode=normalization)
    beta = beta_strict(real.h_known, s) if normalization == "strict" else precoder.beta
    x = transmit(s, precoder, beta)
    signals = receive(x, real.h_true, cfg, rng=rng)
    energy = harvest(real.h_true, x, PowerSplitConfig(rho=1.0, xi=cfg.xi)).q_joules
    counters.received_fixed = int(round(energy / ENERGY_UNIT))
    counters.harvested_fixed = int(round(cfg.rho * energy / ENERGY_UNIT))
    res = detect(signals, beta, cfg, constellation, book, k_true=s.k, labels_true=s.labels)
    errors = np.asarray(res.bits_hat) != bits
    counters.sd_bit_errors = int(errors[: book.k_ant].sum())
    counters.mod_bit_errors = int(errors[book.k_ant :].sum())
    counters.bit_errors = int(errors.sum())
    counters.sd_symbol_errors = int(not res.sd_correct)
    counters.mod_symbol_errors = res.mod_errors
    if res.sd_correct:
        counters.trials_sd_ok = 1
        counters.mod_symbol_errors_sd_ok = res.mod_errors
        counters.mod_bit_errors_sd_ok = counters.mod_bit_errors
    return counters


def simulate_block(
    setup: LinkSetup, points: Sequence[PowerSplitConfig], seed: int, stream: int, block: int, n: int
) -> list[TrialCounters]:
    rng = block_rng(seed, stream, block)
    blk = draw_block(setup, rng, n)
    return [evaluate_block(setup, blk, p) for p in points]


def _run(args):
    return simulate_block(*args)


def simulate(
    setup: LinkSetup,
    points: Sequence[PowerSplitConfig],
    trials: int,
    seed: int = 0,
    stream: int = 0,
    workers: int = 1,
    block: int = BLOCK,
) -> list[TrialCounters]:
    """Run ``trials`` super-symbols and return one counter per operating point.

    Every point sees the same channels, bits and unit noise (common random
    numbers). Output is identical for any ``workers``.
    """
    points = list(points)
    totals = [TrialCounters() for _ in points]
    if trials <= 0 or not points:
        return totals
    n_blocks = -(-trials // block)
    jobs = [(setup, points, seed, stream, b, min(block, trials - b * block)) for b in range(n_blocks)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run, jobs))
    else:
        results = [_run(job) for job in jobs]
    for res in results:
        for i, c in enumerate(res):
            totals[i] = totals[i] + c
    return totals


def wilson_interval(errors: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        return 0.0, 1.0
    from scipy.stats import norm

    z = float(norm.ppf(0.5 + confidence / 2.0))
    p = errors / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if errors == 0 else max(centre - half, 0.0)
    hi = 1.0 if errors == n else min(centre + half, 1.0)
    return lo, hi
