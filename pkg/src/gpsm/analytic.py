"""Closed-form link performance of GPSM with a power-split receiver.

The spatial (pattern) SER, the modulated-symbol SER bound, their coupling
through pattern errors, the overall BER, the mutual information per bit and
the DCMC rate, plus the large-MIMO deterministic variants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Literal

import numpy as np

from .specfun import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    gaussian_q,
    integrate_semi_infinite,
    lambda_pdf,
    noncentral_chi2_2_pdf,
)
from .txchain import Constellation, PatternBook, build_pattern_book, k_eff, make_constellation, sd_bits

__all__ = [
    "SystemConfig",
    "LinkPerformance",
    "sigma2_from_snr_b",
    "spatial_ser",
    "kappa",
    "mod_ser_bound",
    "common_antennas",
    "mod_ser_coupled",
    "delta_correction",
    "overall_ber",
    "mib",
    "dcmc_rate",
    "link_performance",
    "sd_only_performance",
    "asymptotic_point",
]


@dataclass(frozen=True)
class SystemConfig:
    """Antenna counts, modulation, power split and noise level.

    ``sigma2`` is the total receiver noise variance, split as
    ``sigma2_a = alpha * sigma2`` (RF stage) and
    ``sigma2_b = (1 - alpha) * sigma2`` (down-conversion).
    """

    n_t: int = 16
    n_r: int = 8
    n_a: int = 2
    modulation: str = "qpsk"
    rho: float = 0.0
    alpha: float = 1.0
    sigma2: float = 1.0
    mode: Literal["strict", "relaxed", "asymptotic"] = "strict"
    xi: float = 1.0

    def __post_init__(self):
        if not (self.n_t >= self.n_r >= self.n_a >= 1):
            raise ValueError(f"need n_t >= n_r >= n_a >= 1, got ({self.n_t}, {self.n_r}, {self.n_a})")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.sigma2 >= 0.0:
            raise ValueError(f"sigma2 must be >= 0, got {self.sigma2}")
        if not 0.0 < self.xi <= 1.0:
            raise ValueError(f"xi must lie in (0, 1], got {self.xi}")
        if self.mode not in ("strict", "relaxed", "asymptotic"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @classmethod
    def from_snr_b(cls, snr_b_db: float, **kwargs) -> "SystemConfig":
        cfg = cls(**kwargs)
        return replace(cfg, sigma2=sigma2_from_snr_b(snr_b_db, cfg))

    def with_snr_b(self, snr_b_db: float) -> "SystemConfig":
        return replace(self, sigma2=sigma2_from_snr_b(snr_b_db, self))

    @cached_property
    def book(self) -> PatternBook:
        return build_pattern_book(self.n_r, self.n_a)

    @cached_property
    def constellation(self) -> Constellation:
        return make_constellation(self.modulation)

    @property
    def k_ant(self) -> int:
        return sd_bits(self.n_r, self.n_a)

    @property
    def k_eff(self) -> int:
        return self.k_ant + self.n_a * self.constellation.k_mod

    @property
    def sigma2_a(self) -> float:
        return self.alpha * self.sigma2

    @property
    def sigma2_b(self) -> float:
        return (1.0 - self.alpha) * self.sigma2

    @property
    def effective_noise(self) -> float:
        """``sigma2_a + sigma2_b / (1 - rho)``, the noise seen by the BB detector."""
        if self.rho >= 1.0:
            raise ValueError("rho = 1 leaves no power for detection")
        return self.sigma2_a + self.sigma2_b / (1.0 - self.rho)


@dataclass(frozen=True)
class LinkPerformance:
    e_s_ant: float
    e_s_mod: float
    e_s_mod_coupled: float
    e_b_eff: float
    mib: float
    rate: float
    q_normalized: float
    k_eff: int = field(default=0)


def sigma2_from_snr_b(snr_b_db: float, cfg: SystemConfig) -> float:
    """Noise variance for ``SNR_b = 1 / (sigma2 * k_eff / N_a)``."""
    return cfg.n_a / (10.0 ** (snr_b_db / 10.0) * cfg.k_eff)


def _miss_probability(lam: float, n_others: int, quad: QuadratureSpec) -> float:
    """``P(one active RA falls below the strongest of n_others noise-only RAs)``.

    Computed as ``int (1 - F(g)**m) f(g; lam) dg`` so small values keep
    their relative precision.
    """
    if n_others == 0:
        return 0.0

    def integrand(g):
        return -np.expm1(n_others * np.log1p(-np.exp(-0.5 * g))) * noncentral_chi2_2_pdf(g, lam)

    spread = 2.0 * math.sqrt(1.0 + lam)
    marks = [lam - 6 * spread, lam - 2 * spread, lam, lam + 6 * spread, 2 * math.log(n_others + 1) + 10]
    return integrate_semi_infinite(integrand, quad, breakpoints=marks, scale=max(spread, 1.0))


def _average_over_lambda(fn, cfg: SystemConfig, quad: QuadratureSpec) -> float:
    """``int fn(lam) f_lambda(lam) dlam`` with the variable rescaled to unit rate."""
    rate = cfg.n_a * cfg.sigma2_a / 2.0
    shape = cfg.n_t - cfg.n_r + 1

    def integrand(t):
        lam = t / rate
        return fn(lam) * lambda_pdf(lam, cfg.n_t, cfg.n_r, cfg.n_a, cfg.sigma2_a) / rate

    sd = math.sqrt(shape)
    marks = [max(shape - 1 - 4 * sd, 0.0), shape - 1, shape + 4 * sd, shape + 12 * sd]
    return integrate_semi_infinite(integrand, quad, breakpoints=marks, scale=sd)


@lru_cache(maxsize=4096)
def _spatial_ser(n_t, n_r, n_a, sigma2_a, quad):
    cfg = SystemConfig(n_t=n_t, n_r=n_r, n_a=n_a, alpha=1.0, sigma2=sigma2_a)
    m = n_r - n_a

    def pattern_error(lams):
        miss = np.array([_miss_probability(float(x), m, quad) for x in np.atleast_1d(lams)])
        return -np.expm1(n_a * np.log1p(-miss))

    return min(max(_average_over_lambda(pattern_error, cfg, quad), 0.0), 1.0)


def spatial_ser(cfg: SystemConfig, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """SER of the SD symbol.

    ``1 - E_lambda[ (int F(g)**(N_r-N_a) f(g; lambda) dg) ** N_a ]``, evaluated
    in complementary form. Depends on ``sigma2_a`` only, never on ``rho`` or
    ``sigma2_b``.
    """
    if cfg.rho >= 1.0:
        raise ValueError("rho = 1 leaves no power for detection")
    if cfg.n_a == cfg.n_r or cfg.sigma2_a == 0.0:
        return 0.0
    return _spatial_ser(cfg.n_t, cfg.n_r, cfg.n_a, float(cfg.sigma2_a), quad)


def kappa(cfg: SystemConfig) -> float:
    """Scale between the non-centrality and the per-stream SINR, ``lambda = kappa * gamma``."""
    if cfg.rho >= 1.0:
        raise ValueError("rho = 1 leaves no power for detection")
    return 2.0 * cfg.effective_noise / cfg.sigma2_a


def mod_ser_bound(cfg: SystemConfig, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Nearest-neighbour union bound on the modulated-symbol SER.

    ``N_min * int Q(d_min sqrt(gamma / 2)) f_gamma(gamma) dgamma`` with
    ``f_gamma(gamma) = kappa f_lambda(kappa gamma)``.
    """
    if cfg.rho >= 1.0:
        raise ValueError("rho = 1 leaves no power for detection")
    if cfg.sigma2 == 0.0:
        return 0.0
    const = cfg.constellation
    shape = cfg.n_t - cfg.n_r + 1
    if cfg.sigma2_a > 0:
        kap = kappa(cfg)
        sigma2_a = cfg.sigma2_a

        def f_gamma(g):
            return kap * lambda_pdf(kap * g, cfg.n_t, cfg.n_r, cfg.n_a, sigma2_a)

    else:
        # no RF-stage noise: gamma is Gamma(shape, rate = N_a * sigma2_b / (1 - rho))
        rate = cfg.n_a * cfg.effective_noise

        def f_gamma(g):
            return np.exp(shape * math.log(rate) + (shape - 1) * np.log(g) - rate * g - math.lgamma(shape))

    mean = shape / (cfg.n_a * cfg.effective_noise)

    def integrand(g):
        return gaussian_q(const.d_min * np.sqrt(g / 2.0)) * f_gamma(g)

    sd = mean / math.sqrt(shape)
    marks = [max(mean - 4 * sd, 0.0) / 4, max(mean - 4 * sd, 0.0), mean, mean + 6 * sd]
    value = const.n_min * integrate_semi_infinite(integrand, quad, breakpoints=marks, scale=sd)
    return min(max(value, 0.0), 1.0)


def common_antennas(pat_a, pat_b) -> int:
    """Number of receive antennas shared by two patterns of equal size."""
    if len(pat_a) != len(pat_b):
        raise ValueError("patterns must activate the same number of antennas")
    return len(set(pat_a) & set(pat_b))


def _mean_common(book: PatternBook) -> float:
    """Mean of ``N_c`` over ordered pairs ``(k, l != k)`` of the selected set."""
    idx = book.index_array
    member = np.zeros((book.size, book.n_r), dtype=np.int64)
    np.put_along_axis(member, idx, 1, axis=1)
    overlap = member @ member.T
    off = overlap.sum() - np.trace(overlap)
    return off / (book.size * (book.size - 1))


def mod_ser_coupled(
    cfg: SystemConfig, book: PatternBook | None, e_s_ant: float, e_s_mod: float
) -> float:
    """Modulated-symbol SER including the effect of SD errors.

    A wrong pattern ``l`` keeps ``N_c`` of the true antennas (SER
    ``e_s_mod``) and lands ``N_d`` streams on noise-only antennas (SER of a
    random guess). The wrong pattern is taken uniform over the other
    ``2**k_ant - 1`` entries and the result averaged over equiprobable true
    patterns.
    """
    book = book if book is not None else cfg.book
    if book.k_ant == 0:
        return e_s_mod
    e_o = cfg.constellation.e_s_o
    n_c = _mean_common(book)
    wrong = (n_c * e_s_mod + (book.n_a - n_c) * e_o) / book.n_a
    return (1.0 - e_s_ant) * e_s_mod + e_s_ant * wrong


def delta_correction(k_ant: int) -> Fraction:
    """Mean Hamming distance from a ``k_ant``-bit word to the other words."""
    if k_ant < 0:
        raise ValueError("k_ant must be >= 0")
    delta = Fraction(0)
    for k in range(1, k_ant + 1):
        delta = delta + (2 ** (k - 1) - delta) / (2**k - 1)
    return delta


def overall_ber(cfg: SystemConfig, book: PatternBook | None, e_s_ant: float, e_s_mod_coupled: float) -> float:
    """``(delta * e_s_ant + N_a * e_s_mod_coupled) / k_eff``."""
    k_ant = book.k_ant if book is not None else cfg.k_ant
    k = k_ant + cfg.n_a * cfg.constellation.k_mod
    delta = float(delta_correction(k_ant))
    return min((delta * e_s_ant + cfg.n_a * e_s_mod_coupled) / k, 1.0)


def mib(e) -> float:
    """Mutual information per bit of a binary symmetric channel with crossover ``e``."""
    e = float(e)
    if not 0.0 <= e <= 1.0:
        raise ValueError(f"error probability must lie in [0, 1], got {e}")
    out = 1.0
    for p in (e, 1.0 - e):
        if p > 0.0:
            out += p * math.log2(p)
    return max(out, 0.0)


def dcmc_rate(cfg: SystemConfig, book: PatternBook | None, mib_value: float) -> float:
    """``k_eff * MIB``."""
    k_ant = book.k_ant if book is not None else cfg.k_ant
    return (k_ant + cfg.n_a * cfg.constellation.k_mod) * mib_value


def _capped_mib(e: float) -> float:
    # the BER expressions can exceed 1/2 at very low SNR; MIB is taken at 1/2 there
    return mib(min(e, 0.5))


def link_performance(cfg: SystemConfig, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> LinkPerformance:
    """Full analytic chain at one operating point. ``rho = 1`` yields energy only."""
    q_norm = cfg.rho
    if cfg.rho >= 1.0:
        return LinkPerformance(1.0, 1.0, 1.0, 0.5, 0.0, 0.0, q_norm, cfg.k_eff)
    book = cfg.book
    e_ant = spatial_ser(cfg, quad)
    e_mod = mod_ser_bound(cfg, quad)
    e_cpl = mod_ser_coupled(cfg, book, e_ant, e_mod)
    e_b = overall_ber(cfg, book, e_ant, e_cpl)
    info = _capped_mib(e_b)
    return LinkPerformance(e_ant, e_mod, e_cpl, e_b, info, dcmc_rate(cfg, book, info), q_norm, cfg.k_eff)


def sd_only_performance(cfg: SystemConfig, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> LinkPerformance:
    """Pattern bits only: BER ``delta * e_s_ant / k_ant`` and rate ``k_ant * MIB``."""
    q_norm = cfg.rho
    k_ant = cfg.k_ant
    if cfg.rho >= 1.0 or k_ant == 0:
        return LinkPerformance(float(k_ant > 0), 0.0, 0.0, 0.5 if k_ant else 0.0, 0.0, 0.0, q_norm, k_ant)
    e_ant = spatial_ser(cfg, quad)
    e_b = float(delta_correction(k_ant)) * e_ant / k_ant
    info = _capped_mib(e_b)
    return LinkPerformance(e_ant, 0.0, 0.0, e_b, info, k_ant * info, q_norm, k_ant)


def asymptotic_point(
    ratio: float,
    n_a: int | None,
    cfg: SystemConfig,
    snr_b_db: float | None = None,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> LinkPerformance:
    """Large-MIMO deterministic performance at load ratio ``N_r / N_t``.

    ``cfg.n_t`` fixes the transmit array and ``N_r = round(ratio * n_t)``.
    ``n_a=None`` selects the conventional scheme ``N_a = N_r``. The
    normalisation tends to ``N_t/N_r - 1``, giving deterministic
    ``lambda_d`` and ``gamma_d``; the coupled SER is approximated by the
    pattern-error-free value. If ``snr_b_db`` is given, ``sigma2`` follows
    from it for this ``(N_r, N_a)``; otherwise ``cfg.sigma2`` is used.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"load ratio must lie in (0, 1), got {ratio}")
    n_t = cfg.n_t
    n_r = int(round(ratio * n_t))
    if not 1 <= n_r < n_t:
        raise ValueError(f"ratio {ratio} gives N_r={n_r} for N_t={n_t}")
    n_a = n_r if n_a is None else int(n_a)
    if not 1 <= n_a <= n_r:
        raise ValueError(f"need 1 <= n_a <= N_r={n_r}, got {n_a}")
    if cfg.rho >= 1.0:
        raise ValueError("rho = 1 leaves no power for detection")
    const = cfg.constellation
    k_ant = sd_bits(n_r, n_a)
    k = k_ant + n_a * const.k_mod
    sigma2 = n_a / (10.0 ** (snr_b_db / 10.0) * k) if snr_b_db is not None else cfg.sigma2
    sigma2_a = cfg.alpha * sigma2
    sigma2_b = (1.0 - cfg.alpha) * sigma2
    load = n_t / n_r - 1.0
    noise = sigma2_a + sigma2_b / (1.0 - cfg.rho)
    if sigma2 == 0.0:
        e_ant = e_mod = 0.0
    else:
        if n_a == n_r or sigma2_a == 0.0:
            e_ant = 0.0
        else:
            lam_d = load / (n_a * sigma2_a / 2.0)
            miss = _miss_probability(lam_d, n_r - n_a, quad)
            e_ant = float(-np.expm1(n_a * np.log1p(-miss)))
        gamma_d = load / (n_a * noise)
        e_mod = min(const.n_min * gaussian_q(const.d_min * math.sqrt(gamma_d / 2.0)), 1.0)
    e_b = min((float(delta_correction(k_ant)) * e_ant + n_a * e_mod) / k, 1.0)
    info = _capped_mib(e_b)
    return LinkPerformance(e_ant, e_mod, e_mod, e_b, info, k * info, cfg.rho, k)
