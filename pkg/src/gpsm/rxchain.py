"""Power-split receiver.

A fraction ``rho`` of the RF power is harvested. The rest feeds a
non-coherent pattern detector (RF stage, noise ``w_a``) and, after
down-conversion (extra noise ``w_b``), a per-stream minimum-distance
symbol detector. Signals may carry any leading batch shape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .txchain import Constellation, PatternBook, demap

__all__ = [
    "PowerSplitConfig",
    "ReceivedSignals",
    "HarvestReport",
    "DetectionResult",
    "receive",
    "harvest",
    "detect_pattern",
    "detect_symbols",
    "detect",
    "demap",
]


@dataclass(frozen=True)
class PowerSplitConfig:
    rho: float = 0.0
    alpha: float = 1.0
    sigma2: float = 1.0
    xi: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.sigma2 < 0.0:
            raise ValueError("sigma2 must be >= 0")
        if not 0.0 < self.xi <= 1.0:
            raise ValueError(f"xi must lie in (0, 1], got {self.xi}")

    @property
    def sigma2_a(self) -> float:
        return self.alpha * self.sigma2

    @property
    def sigma2_b(self) -> float:
        return (1.0 - self.alpha) * self.sigma2

    @property
    def detects(self) -> bool:
        return self.rho < 1.0


@dataclass(frozen=True)
class ReceivedSignals:
    y_rf_equiv: np.ndarray
    y_bb: np.ndarray
    w_a: np.ndarray
    w_b: np.ndarray


@dataclass(frozen=True)
class HarvestReport:
    q_joules: np.ndarray | float
    q_normalized: float


@dataclass(frozen=True)
class DetectionResult:
    k_hat: int
    m_hat: list[int]
    bits_hat: list[int]
    sd_correct: bool
    mod_errors: int


def _unit_cn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)


def receive(
    x: np.ndarray,
    h_true: np.ndarray,
    cfg: PowerSplitConfig,
    rng: np.random.Generator | None = None,
    unit_noise: tuple[np.ndarray, np.ndarray] | None = None,
) -> ReceivedSignals:
    """RF-stage and baseband observations after the power split.

    ``y_a = sqrt(1 - rho) (H x + w_a)`` and ``y_b = y_a + w_b``, with the
    same ``w_a`` in both. Noise comes either from ``rng`` or from
    ``unit_noise``, a pair of CN(0, 1) arrays that are scaled here; passing
    the same pair at different ``rho`` reproduces the same noise.
    """
    r = (h_true @ x[..., None])[..., 0]
    if unit_noise is None:
        if rng is None:
            raise ValueError("need rng or unit_noise")
        unit_noise = (_unit_cn(rng, r.shape), _unit_cn(rng, r.shape))
    w_a = np.sqrt(cfg.sigma2_a) * unit_noise[0]
    w_b = np.sqrt(cfg.sigma2_b) * unit_noise[1]
    y_a = np.sqrt(1.0 - cfg.rho) * (r + w_a)
    return ReceivedSignals(y_rf_equiv=y_a, y_bb=y_a + w_b, w_a=w_a, w_b=w_b)


def harvest(h_true: np.ndarray, x: np.ndarray, cfg: PowerSplitConfig, include_noise: np.ndarray | None = None) -> HarvestReport:
    """Harvested energy ``xi * rho * sum |H x|^2`` (noise is not counted).

    ``include_noise`` (an RF noise draw ``w_a``) gives the noise-inclusive
    figure instead, for diagnostics only.
    """
    r = (h_true @ x[..., None])[..., 0]
    if include_noise is not None:
        r = r + include_noise
    q = cfg.xi * cfg.rho * np.sum(np.abs(r) ** 2, axis=-1)
    q = q if np.ndim(q) else float(q)
    return HarvestReport(q_joules=q, q_normalized=cfg.xi * cfg.rho)


def detect_pattern(y_a: np.ndarray | ReceivedSignals, book: PatternBook) -> np.ndarray | int:
    """Pattern with the largest accumulated power; ties go to the lowest index."""
    if isinstance(y_a, ReceivedSignals):
        y_a = y_a.y_rf_equiv
    power = np.abs(y_a) ** 2
    scores = power[..., book.index_array].sum(axis=-1)
    k_hat = np.argmax(scores, axis=-1)
    return k_hat if np.ndim(k_hat) else int(k_hat)


def detect_symbols(
    y_bb: np.ndarray | ReceivedSignals,
    k_hat,
    beta,
    cfg: PowerSplitConfig,
    constellation: Constellation,
    book: PatternBook,
    gain=1.0,
) -> np.ndarray:
    """Minimum-distance decisions on the antennas of the detected pattern.

    The reference for stream ``i`` is ``sqrt((1 - rho) beta / N_a) g b``,
    where ``g`` is the effective gain ``h_v p_v`` of antenna ``v``. Channel
    inversion on the known channel makes ``g = 1`` on every antenna, which
    is the default.
    """
    if isinstance(y_bb, ReceivedSignals):
        y_bb = y_bb.y_bb
    if not cfg.detects:
        raise ValueError("rho = 1: the receiver only harvests")
    antennas = book.index_array[k_hat]
    z = np.take_along_axis(y_bb, antennas, axis=-1) if np.ndim(y_bb) > 1 else y_bb[antennas]
    g = np.asarray(gain)
    if g.ndim and g.shape[-1] == book.n_r:
        g = np.take_along_axis(g, antennas, axis=-1) if g.ndim > 1 else g[antennas]
    amp = np.sqrt((1.0 - cfg.rho) * np.asarray(beta) / book.n_a)
    ref = (amp[..., None] if np.ndim(amp) else amp) * g
    return constellation.nearest(z / ref)


def detect(
    signals: ReceivedSignals,
    beta: float,
    cfg: PowerSplitConfig,
    constellation: Constellation,
    book: PatternBook,
    k_true: int | None = None,
    labels_true=None,
) -> DetectionResult:
    """Pattern then symbol detection for a single super-symbol."""
    if not cfg.detects:
        raise ValueError("rho = 1: the receiver only harvests")
    k_hat = detect_pattern(signals, book)
    m_hat = [int(m) for m in detect_symbols(signals, k_hat, beta, cfg, constellation, book)]
    mod_errors = 0 if labels_true is None else int(np.sum(np.asarray(m_hat) != np.asarray(labels_true)))
    return DetectionResult(
        k_hat=k_hat,
        m_hat=m_hat,
        bits_hat=demap(k_hat, m_hat, book, constellation),
        sd_correct=k_true is None or k_hat == k_true,
        mod_errors=mod_errors,
    )
