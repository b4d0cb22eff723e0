"""MIMO channel draws: i.i.d. Rayleigh, Kronecker correlation, CSIT error.

All generators take a ``numpy.random.Generator`` and an optional leading
batch shape, so one call can produce a whole block of trials.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChannelModel",
    "ChannelRealization",
    "draw_iid_rayleigh",
    "correlation_matrix",
    "psd_sqrt",
    "apply_kronecker",
    "split_csit",
]


def draw_iid_rayleigh(n_r: int, n_t: int, rng: np.random.Generator, size: tuple[int, ...] = ()) -> np.ndarray:
    """Entries i.i.d. CN(0, 1), shape ``size + (n_r, n_t)``."""
    if not n_t >= n_r >= 1:
        raise ValueError(f"need n_t >= n_r >= 1, got n_r={n_r}, n_t={n_t}")
    shape = tuple(size) + (n_r, n_t)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)


def correlation_matrix(n: int, rho: float) -> np.ndarray:
    """Exponential correlation ``R[i, j] = rho**|i - j|``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"correlation coefficient must lie in [0, 1), got {rho}")
    idx = np.arange(n)
    return rho ** np.abs(idx[:, None] - idx[None, :]).astype(float)


def psd_sqrt(r: np.ndarray) -> np.ndarray:
    """Principal square root of a symmetric positive definite matrix."""
    r = np.asarray(r)
    if not np.allclose(r, r.conj().T):
        raise ValueError("correlation matrix must be symmetric")
    w, v = np.linalg.eigh(r)
    if w.min() <= 0:
        raise ValueError("correlation matrix must be positive definite")
    return (v * np.sqrt(w)) @ v.conj().T


def apply_kronecker(g: np.ndarray, r_t: np.ndarray, r_r: np.ndarray) -> np.ndarray:
    """Kronecker-correlated channel from an uncorrelated ``(..., N_r, N_t)`` draw.

    Receive correlation acts on rows and transmit correlation on columns:
    ``R_r^{1/2} G (R_t^{1/2})^T``. Identity matrices return ``g`` unchanged.
    """
    g = np.asarray(g)
    n_r, n_t = g.shape[-2:]
    r_t = np.asarray(r_t)
    r_r = np.asarray(r_r)
    if r_t.shape != (n_t, n_t) or r_r.shape != (n_r, n_r):
        raise ValueError(f"correlation shapes {r_t.shape}, {r_r.shape} do not fit channel {g.shape[-2:]}")
    eye_t = np.array_equal(r_t, np.eye(n_t))
    eye_r = np.array_equal(r_r, np.eye(n_r))
    out = g
    if not eye_r:
        out = psd_sqrt(r_r) @ out
    if not eye_t:
        out = out @ psd_sqrt(r_t).T
    return out


@dataclass(frozen=True)
class ChannelRealization:
    """``h_true`` carries the signal; only ``h_known`` reaches the precoder."""

    h_true: np.ndarray
    h_known: np.ndarray


def split_csit(h: np.ndarray, sigma2_e: float, rng: np.random.Generator) -> ChannelRealization:
    """Imperfect CSIT: ``H = H_t + H_e`` with ``H_t = sqrt(1 - sigma2_e) h``.

    ``h`` is a unit-variance draw; ``H_e`` is an independent CN(0, sigma2_e)
    draw of the same shape.
    """
    if not 0.0 <= sigma2_e < 1.0:
        raise ValueError(f"sigma2_e must lie in [0, 1), got {sigma2_e}")
    h = np.asarray(h)
    if sigma2_e == 0.0:
        return ChannelRealization(h_true=h, h_known=h)
    h_t = np.sqrt(1.0 - sigma2_e) * h
    err = (rng.standard_normal(h.shape) + 1j * rng.standard_normal(h.shape)) * np.sqrt(0.5 * sigma2_e)
    return ChannelRealization(h_true=h_t + err, h_known=h_t)


@dataclass(frozen=True)
class ChannelModel:
    """Fading model for one link.

    Correlation (``rho_t``, ``rho_r``) and CSIT error (``sigma2_e``) are
    separate studies and may not be combined.
    """

    n_t: int = 16
    n_r: int = 8
    rho_t: float = 0.0
    rho_r: float = 0.0
    sigma2_e: float = 0.0

    def __post_init__(self):
        if not self.n_t >= self.n_r >= 1:
            raise ValueError(f"need n_t >= n_r >= 1, got n_t={self.n_t}, n_r={self.n_r}")
        for name in ("rho_t", "rho_r", "sigma2_e"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {value}")
        if self.correlated and self.sigma2_e > 0:
            raise ValueError("antenna correlation and CSIT error cannot be combined in one model")

    @property
    def correlated(self) -> bool:
        return self.rho_t > 0 or self.rho_r > 0

    @property
    def sigma2_t(self) -> float:
        return 1.0 - self.sigma2_e

    def draw(self, rng: np.random.Generator, size: tuple[int, ...] = ()) -> ChannelRealization:
        g = draw_iid_rayleigh(self.n_r, self.n_t, rng, size)
        if self.correlated:
            h = apply_kronecker(g, correlation_matrix(self.n_t, self.rho_t), correlation_matrix(self.n_r, self.rho_r))
            return ChannelRealization(h_true=h, h_known=h)
        return split_csit(g, self.sigma2_e, rng)
