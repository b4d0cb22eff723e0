"""Special functions and semi-infinite quadrature.

Everything here is a pure function of its arguments. The densities accept
scalars or numpy arrays and broadcast like ufuncs.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import special

__all__ = [
    "QuadratureError",
    "QuadratureSpec",
    "gaussian_q",
    "chi2_2_cdf",
    "noncentral_chi2_2_pdf",
    "lambda_pdf",
    "integrate_semi_infinite",
]


class QuadratureError(ArithmeticError):
    """Raised when an adaptive integral fails to reach its tolerance."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Settings for :func:`integrate_semi_infinite`.

    Parameters
    ----------
    node_count : int
        Gauss-Legendre nodes per panel (at least 16).
    upper_truncation : float
        Hard cutoff for the upper limit. Reaching it while the tail is still
        significant is treated as non-convergence.
    rel_tolerance : float
        Target relative error of the integral, in ``(0, 1e-3]``.
    max_panels : int
        Refinement budget.
    """

    node_count: int = 24
    upper_truncation: float = 1e9
    rel_tolerance: float = 1e-10
    max_panels: int = 4000

    def __post_init__(self):
        if self.node_count < 16:
            raise ValueError(f"node_count must be >= 16, got {self.node_count}")
        if not 0.0 < self.rel_tolerance <= 1e-3:
            raise ValueError(f"rel_tolerance must lie in (0, 1e-3], got {self.rel_tolerance}")
        if not self.upper_truncation > 0:
            raise ValueError("upper_truncation must be positive")


DEFAULT_QUADRATURE = QuadratureSpec()


def gaussian_q(x):
    """Tail probability of the standard normal, ``P(N(0,1) > x)``."""
    out = special.ndtr(-np.asarray(x, dtype=float))
    return out if out.ndim else float(out)


def chi2_2_cdf(g):
    """CDF of the central chi-square law with two degrees of freedom."""
    g = np.asarray(g, dtype=float)
    if np.any(g < 0):
        raise ValueError("chi2_2_cdf is defined for g >= 0")
    out = -np.expm1(-0.5 * g)
    return out if out.ndim else float(out)


def noncentral_chi2_2_pdf(g, lam):
    """Density of the non-central chi-square law with two degrees of freedom.

    Uses ``I0(x) = i0e(x) * exp(x)`` so the exponent collapses to
    ``-(sqrt(g) - sqrt(lam))**2 / 2`` and nothing overflows.
    """
    g = np.asarray(g, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if np.any(g < 0) or np.any(lam < 0):
        raise ValueError("noncentral_chi2_2_pdf needs g >= 0 and lam >= 0")
    root = np.sqrt(lam * g)
    out = 0.5 * special.i0e(root) * np.exp(-0.5 * (np.sqrt(g) - np.sqrt(lam)) ** 2)
    return out if out.ndim else float(out)


def _lambda_pdf_params(n_t, n_r, n_a, sigma2_a):
    if not (n_t >= n_r >= n_a >= 1):
        raise ValueError(f"need n_t >= n_r >= n_a >= 1, got ({n_t}, {n_r}, {n_a})")
    if sigma2_a <= 0:
        raise ValueError("sigma2_a must be positive")
    shape = n_t - n_r + 1
    rate = n_a * sigma2_a / 2.0
    return shape, rate


def lambda_pdf(lam, n_t, n_r, n_a, sigma2_a):
    """Density of the non-centrality parameter under channel inversion.

    Written exactly in the product form
    ``N_a**(d+1) * (sigma2_a/2) / d! * exp(-lam*N_a*sigma2_a/2) * (lam*sigma2_a/2)**d``
    with ``d = n_t - n_r``, evaluated in log space (``lgamma`` for the
    factorial). This is the Gamma density with shape ``d + 1`` and rate
    ``N_a * sigma2_a / 2``.
    """
    shape, rate = _lambda_pdf_params(n_t, n_r, n_a, sigma2_a)
    d = shape - 1
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("lambda_pdf is defined for lam >= 0")
    half = sigma2_a / 2.0
    with np.errstate(divide="ignore"):
        log_pow = d * np.log(lam * half) if d > 0 else np.zeros_like(lam)
    log_f = (d + 1) * math.log(n_a) + math.log(half) - math.lgamma(d + 1) - lam * rate + log_pow
    out = np.exp(log_f)
    return out if out.ndim else float(out)


@lru_cache(maxsize=None)
def _legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _panel(f, a: float, b: float, n: int):
    """Return (fine, error) for one panel: n nodes on [a,b] vs n on each half."""
    x, w = _legendre(n)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    quarter = 0.5 * half
    nodes = np.concatenate([mid + half * x, (a + quarter) + quarter * x, (mid + quarter) + quarter * x])
    vals = np.asarray(f(nodes), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError(f"integrand not finite on [{a}, {b}]")
    coarse = half * np.dot(w, vals[:n])
    fine = quarter * (np.dot(w, vals[n : 2 * n]) + np.dot(w, vals[2 * n :]))
    return fine, abs(fine - coarse)


def integrate_semi_infinite(
    f: Callable[[np.ndarray], np.ndarray],
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    breakpoints: Sequence[float] = (),
    scale: float = 1.0,
) -> float:
    """Integrate ``f`` over ``[0, inf)``.

    ``f`` must accept a 1-d array of abscissae. Panels are laid on
    ``[0, breakpoints..., ...]`` and then extended with doubling widths
    (starting at ``scale``) until two consecutive tail panels fall below
    ``rel_tolerance`` times the running integral. Panels are then bisected
    globally, worst error first, until the summed error estimate meets the
    tolerance.

    Raises
    ------
    QuadratureError
        If the tail is still significant at ``upper_truncation`` or the
        panel budget runs out.
    """
    n = spec.node_count
    tol = spec.rel_tolerance
    cut = spec.upper_truncation
    edges = [0.0] + sorted(float(b) for b in breakpoints if 0.0 < b < cut)
    panels = []  # (-err, a, b, fine, err)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            fine, err = _panel(f, a, b, n)
            panels.append((-err, a, b, fine, err))
            total += fine
    width = max(float(scale), edges[-1] - edges[-2] if len(edges) > 1 else 0.0, 1e-300)
    a = edges[-1]
    quiet = 0
    while quiet < 2:
        if a >= cut:
            raise QuadratureError(f"tail still significant at upper_truncation={cut}")
        b = min(a + width, cut)
        fine, err = _panel(f, a, b, n)
        panels.append((-err, a, b, fine, err))
        total += fine
        if total == 0.0 and b >= cut:
            return 0.0
        quiet = quiet + 1 if total != 0.0 and abs(fine) <= 0.01 * tol * abs(total) else 0
        a = b
        width *= 2.0
    heapq.heapify(panels)
    err_sum = sum(p[4] for p in panels)
    while err_sum > tol * abs(total) and err_sum > 1e-300:
        if len(panels) >= spec.max_panels:
            raise QuadratureError(
                f"no convergence: error estimate {err_sum:.3e} vs target {tol * abs(total):.3e}"
            )
        _, a, b, fine, err = heapq.heappop(panels)
        mid = 0.5 * (a + b)
        total -= fine
        err_sum -= err
        for lo, hi in ((a, mid), (mid, b)):
            pf, pe = _panel(f, lo, hi, n)
            heapq.heappush(panels, (-pe, lo, hi, pf, pe))
            total += pf
            err_sum += pe
    # re-sum to shed drift from incremental updates
    return float(math.fsum(p[3] for p in panels))
