"""Transmitter: pattern book, bit mapping, constellations and CI precoding.

Antenna and pattern indices are 0-based throughout. The pattern ``(0, 2)``
activates the first and third receive antennas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Literal, Sequence

import numpy as np
from scipy import linalg

__all__ = [
    "SingularChannelError",
    "PatternBook",
    "Constellation",
    "SuperSymbol",
    "Precoder",
    "sd_bits",
    "build_pattern_book",
    "psk",
    "qam",
    "make_constellation",
    "k_eff",
    "map_bits",
    "demap",
    "ci_precoder",
    "beta_strict",
    "beta_relaxed",
    "transmit",
]


class SingularChannelError(np.linalg.LinAlgError):
    """The channel Gram matrix ``H H^H`` cannot be factorised."""


def bits_to_int(bits) -> int:
    """MSB-first natural binary."""
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def int_to_bits(value: int, width: int) -> list[int]:
    return [(value >> (width - 1 - i)) & 1 for i in range(width)]


@dataclass(frozen=True)
class PatternBook:
    """Legitimate receive-antenna activation patterns.

    ``all_patterns`` holds every ``n_a``-subset of ``range(n_r)`` in
    lexicographic order; ``selected`` is its first ``2**k_ant`` entries and
    ``selected[k]`` is the pattern signalled by SD symbol ``k``.
    """

    n_r: int
    n_a: int
    all_patterns: tuple[tuple[int, ...], ...]
    selected: tuple[tuple[int, ...], ...]
    k_ant: int

    @property
    def size(self) -> int:
        return len(self.selected)

    @property
    def index_array(self) -> np.ndarray:
        """``(2**k_ant, n_a)`` integer array of the selected patterns."""
        return np.array(self.selected, dtype=np.intp).reshape(self.size, self.n_a)

    def omega(self, k: int) -> np.ndarray:
        """Columns of ``I_{n_r}`` picked by pattern ``k``."""
        return np.eye(self.n_r)[:, list(self.selected[k])]


def sd_bits(n_r: int, n_a: int) -> int:
    """``floor(log2(C(n_r, n_a)))`` without enumerating patterns."""
    if not 1 <= n_a <= n_r:
        raise ValueError(f"need 1 <= n_a <= n_r, got n_a={n_a}, n_r={n_r}")
    return math.comb(n_r, n_a).bit_length() - 1


def build_pattern_book(n_r: int, n_a: int) -> PatternBook:
    k_ant = sd_bits(n_r, n_a)
    all_patterns = tuple(combinations(range(n_r), n_a))
    return PatternBook(
        n_r=n_r, n_a=n_a, all_patterns=all_patterns, selected=all_patterns[: 1 << k_ant], k_ant=k_ant
    )


@dataclass(frozen=True)
class Constellation:
    """Unit-average-energy constellation indexed by its Gray label.

    ``points[label]`` is the symbol carrying the ``k_mod``-bit word
    ``label`` (MSB first).
    """

    name: str
    points: np.ndarray
    d_min: float
    n_min: float

    @property
    def order(self) -> int:
        return len(self.points)

    @property
    def k_mod(self) -> int:
        return int(round(math.log2(self.order)))

    @property
    def e_s_o(self) -> float:
        """Symbol error rate of a uniform random guess."""
        return (self.order - 1) / self.order

    def nearest(self, z: np.ndarray) -> np.ndarray:
        """Minimum-distance decision, returns labels."""
        z = np.asarray(z)
        return np.argmin(np.abs(z[..., None] - self.points) ** 2, axis=-1)


def _gray(i):
    return i ^ (i >> 1)


def psk(order: int) -> Constellation:
    """Gray-labelled M-PSK. QPSK is rotated by pi/4 (one bit per rail)."""
    if order < 2 or order & (order - 1):
        raise ValueError(f"PSK order must be a power of two >= 2, got {order}")
    offset = math.pi / 4 if order == 4 else 0.0
    points = np.empty(order, dtype=complex)
    for i in range(order):
        points[_gray(i)] = np.exp(1j * (2 * math.pi * i / order + offset))
    if order == 2:
        d_min, n_min = 2.0, 1.0
    else:
        d_min, n_min = 2 * math.sin(math.pi / order), 2.0
    return Constellation(name=f"{order}psk", points=points, d_min=d_min, n_min=n_min)


def qam(order: int) -> Constellation:
    """Square Gray-labelled M-QAM normalised to unit average energy."""
    side = int(round(math.sqrt(order)))
    if side * side != order or side < 2 or side & (side - 1):
        raise ValueError(f"QAM order must be an even power of two, got {order}")
    half_bits = int(round(math.log2(side)))
    levels = 2 * np.arange(side) - (side - 1)
    scale = math.sqrt(2 * (order - 1) / 3)
    points = np.empty(order, dtype=complex)
    for i in range(side):
        for q in range(side):
            label = (_gray(i) << half_bits) | _gray(q)
            points[label] = (levels[i] + 1j * levels[q]) / scale
    d_min = 2 / scale
    n_min = 4 * (1 - 1 / side)
    return Constellation(name=f"{order}qam", points=points, d_min=d_min, n_min=n_min)


def make_constellation(name: str) -> Constellation:
    """``'bpsk'``, ``'qpsk'``, ``'8psk'``, ``'16qam'``, ``'64qam'``..."""
    key = name.strip().lower()
    aliases = {"bpsk": "2psk", "qpsk": "4psk"}
    key = aliases.get(key, key)
    if key.endswith("psk"):
        return psk(int(key[:-3]))
    if key.endswith("qam"):
        return qam(int(key[:-3]))
    raise ValueError(f"unknown modulation {name!r}")


def k_eff(book: PatternBook, constellation: Constellation) -> int:
    """Bits per super-symbol: SD bits plus ``n_a`` modulated symbols."""
    return book.k_ant + book.n_a * constellation.k_mod


@dataclass(frozen=True)
class SuperSymbol:
    k: int
    labels: tuple[int, ...]
    modulated: np.ndarray
    dense: np.ndarray


def map_bits(bits: Sequence[int], book: PatternBook, constellation: Constellation) -> SuperSymbol:
    """Leading ``k_ant`` bits pick the pattern, the rest fill the streams."""
    bits = [int(b) for b in bits]
    need = k_eff(book, constellation)
    if len(bits) != need:
        raise ValueError(f"expected {need} bits, got {len(bits)}")
    k = bits_to_int(bits[: book.k_ant])
    km = constellation.k_mod
    labels = tuple(bits_to_int(bits[book.k_ant + i * km : book.k_ant + (i + 1) * km]) for i in range(book.n_a))
    modulated = constellation.points[list(labels)]
    dense = np.zeros(book.n_r, dtype=complex)
    dense[list(book.selected[k])] = modulated
    return SuperSymbol(k=k, labels=labels, modulated=modulated, dense=dense)


def demap(k_hat: int, m_hat: Sequence[int], book: PatternBook, constellation: Constellation) -> list[int]:
    """Inverse of :func:`map_bits`."""
    if len(m_hat) != book.n_a:
        raise ValueError(f"expected {book.n_a} symbol labels, got {len(m_hat)}")
    bits = int_to_bits(int(k_hat), book.k_ant)
    for label in m_hat:
        bits.extend(int_to_bits(int(label), constellation.k_mod))
    return bits


@dataclass(frozen=True)
class Precoder:
    """Channel-inversion precoder ``P = H^H (H H^H)^{-1}``.

    ``beta`` is filled in by :func:`beta_relaxed` (per channel) or left as
    ``None`` in strict mode, where it depends on the super-symbol.
    """

    p: np.ndarray
    gram_factor: tuple = field(repr=False)
    mode: Literal["strict", "relaxed"] = "strict"
    beta: float | None = None

    def solve_gram(self, rhs: np.ndarray) -> np.ndarray:
        return linalg.cho_solve(self.gram_factor, rhs)


def _gram_factor(h: np.ndarray):
    h = np.asarray(h, dtype=complex)
    n_r, n_t = h.shape
    if n_r > n_t:
        raise ValueError(f"need n_t >= n_r, got H of shape {h.shape}")
    gram = h @ h.conj().T
    try:
        return linalg.cho_factor(gram, lower=True)
    except linalg.LinAlgError as exc:
        raise SingularChannelError("channel is rank deficient") from exc


def ci_precoder(h_known: np.ndarray, mode: Literal["strict", "relaxed"] = "strict") -> Precoder:
    h_known = np.asarray(h_known, dtype=complex)
    factor = _gram_factor(h_known)
    p = linalg.cho_solve(factor, h_known).conj().T
    beta = None
    if mode == "relaxed":
        inv_trace = np.trace(linalg.cho_solve(factor, np.eye(h_known.shape[0]))).real
        beta = h_known.shape[0] / inv_trace
    elif mode != "strict":
        raise ValueError(f"unknown normalisation mode {mode!r}")
    return Precoder(p=p, gram_factor=factor, mode=mode, beta=beta)


def beta_strict(h_known: np.ndarray, s: SuperSymbol | np.ndarray, n_a: int | None = None) -> float:
    """Per-super-symbol normalisation ``N_a / s^H (H H^H)^{-1} s``."""
    dense = s.dense if isinstance(s, SuperSymbol) else np.asarray(s, dtype=complex)
    if n_a is None:
        n_a = len(s.modulated) if isinstance(s, SuperSymbol) else int(np.count_nonzero(dense))
    z = linalg.cho_solve(_gram_factor(h_known), dense)
    return n_a / float(np.vdot(dense, z).real)


def beta_relaxed(h_known: np.ndarray) -> float:
    """Per-channel normalisation ``N_r / tr[(H H^H)^{-1}]``."""
    return ci_precoder(h_known, mode="relaxed").beta


def transmit(s: SuperSymbol, precoder: Precoder, beta: float | None = None) -> np.ndarray:
    """``x = sqrt(beta / N_a) P s``.

    In strict mode ``beta`` defaults to the per-symbol value that makes
    ``||x||^2 = 1``.
    """
    n_a = len(s.modulated)
    if precoder.p.shape[1] != s.dense.shape[0]:
        raise ValueError("super-symbol length does not match precoder")
    if beta is None:
        if precoder.mode == "relaxed":
            beta = precoder.beta
        else:
            beta = n_a / float(np.vdot(s.dense, precoder.solve_gram(s.dense)).real)
    return math.sqrt(beta / n_a) * (precoder.p @ s.dense)
