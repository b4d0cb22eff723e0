import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpsm.txchain import (
    SingularChannelError,
    beta_relaxed,
    beta_strict,
    build_pattern_book,
    ci_precoder,
    demap,
    k_eff,
    make_constellation,
    map_bits,
    psk,
    qam,
    sd_bits,
    transmit,
)

QPSK = make_constellation("qpsk")


class TestPatternBook:
    @pytest.mark.parametrize("n_a, k_ant", [(1, 3), (2, 4), (3, 5), (4, 6), (5, 5), (6, 4), (7, 3), (8, 0)])
    def test_sd_bits(self, n_a, k_ant):
        assert sd_bits(8, n_a) == k_ant
        assert build_pattern_book(8, n_a).k_ant == k_ant

    def test_sd_bits_large(self):
        assert sd_bits(2046, 2) == math.floor(math.log2(math.comb(2046, 2)))

    def test_lexicographic_prefix(self):
        book = build_pattern_book(8, 2)
        assert book.size == 16
        assert book.selected == tuple(combinations(range(8), 2))[:16]
        assert book.selected[0] == (0, 1) and book.selected[15] == (2, 5)

    def test_omega(self):
        book = build_pattern_book(4, 2)
        np.testing.assert_array_equal(book.omega(1), np.eye(4)[:, [0, 2]])

    def test_rejects_bad_counts(self):
        with pytest.raises(ValueError):
            sd_bits(4, 5)


class TestConstellations:
    @pytest.mark.parametrize("name", ["bpsk", "qpsk", "8psk", "16qam", "64qam"])
    def test_unit_energy_and_gray(self, name):
        c = make_constellation(name)
        assert np.mean(np.abs(c.points) ** 2) == pytest.approx(1.0)
        d = np.abs(c.points[:, None] - c.points[None, :])
        np.fill_diagonal(d, np.inf)
        assert d.min() == pytest.approx(c.d_min)
        for a in range(c.order):
            for b in range(c.order):
                if a != b and d[a, b] == pytest.approx(c.d_min):
                    assert bin(a ^ b).count("1") == 1

    def test_qpsk_parameters(self):
        assert QPSK.d_min == pytest.approx(math.sqrt(2))
        assert QPSK.n_min == 2
        assert QPSK.e_s_o == 0.75

    def test_nearest_is_identity_on_points(self):
        c = qam(16)
        np.testing.assert_array_equal(c.nearest(c.points), np.arange(16))

    def test_bad_orders(self):
        with pytest.raises(ValueError):
            psk(3)
        with pytest.raises(ValueError):
            qam(8)
        with pytest.raises(ValueError):
            make_constellation("ofdm")


class TestMapping:
    def test_known_mapping(self):
        book = build_pattern_book(8, 2)
        # SD word 0101 -> pattern 5 = (0, 6); QPSK labels 2 and 3
        bits = [0, 1, 0, 1, 1, 0, 1, 1]
        s = map_bits(bits, book, QPSK)
        assert s.k == 5
        assert s.labels == (2, 3)
        assert np.flatnonzero(s.dense).tolist() == [0, 6]
        np.testing.assert_allclose(s.dense[[0, 6]], QPSK.points[[2, 3]])

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            map_bits([0, 1], build_pattern_book(8, 2), QPSK)

    @settings(max_examples=60, deadline=None)
    @given(n_a=st.integers(1, 8), data=st.data())
    def test_roundtrip(self, n_a, data):
        book = build_pattern_book(8, n_a)
        bits = data.draw(st.lists(st.integers(0, 1), min_size=k_eff(book, QPSK), max_size=k_eff(book, QPSK)))
        s = map_bits(bits, book, QPSK)
        assert demap(s.k, list(s.labels), book, QPSK) == bits


class TestPrecoder:
    def test_inverts_channel(self, rng):
        h = (rng.standard_normal((8, 16)) + 1j * rng.standard_normal((8, 16))) / math.sqrt(2)
        pre = ci_precoder(h)
        np.testing.assert_allclose(h @ pre.p, np.eye(8), atol=1e-10)
        np.testing.assert_allclose(pre.p, np.linalg.pinv(h), atol=1e-10)

    def test_strict_normalisation(self, rng):
        book = build_pattern_book(8, 3)
        h = (rng.standard_normal((8, 16)) + 1j * rng.standard_normal((8, 16))) / math.sqrt(2)
        s = map_bits(rng.integers(0, 2, k_eff(book, QPSK)), book, QPSK)
        x = transmit(s, ci_precoder(h))
        assert np.vdot(x, x).real == pytest.approx(1.0, rel=1e-12)
        assert np.allclose(h @ x / math.sqrt(beta_strict(h, s) / 3), s.dense)

    def test_relaxed_average_power(self, rng):
        book = build_pattern_book(8, 2)
        powers = []
        for _ in range(300):
            h = (rng.standard_normal((8, 16)) + 1j * rng.standard_normal((8, 16))) / math.sqrt(2)
            pre = ci_precoder(h, mode="relaxed")
            assert pre.beta == pytest.approx(beta_relaxed(h))
            s = map_bits(rng.integers(0, 2, 8), book, QPSK)
            x = transmit(s, pre)
            powers.append(np.vdot(x, x).real)
        # averaging over patterns as well as channels gives unit power in expectation
        assert np.mean(powers) == pytest.approx(1.0, rel=0.1)

    def test_singular(self):
        h = np.ones((2, 4), dtype=complex)
        with pytest.raises(SingularChannelError):
            ci_precoder(h)

    def test_shape_checks(self, rng):
        with pytest.raises(ValueError):
            ci_precoder(np.ones((4, 2)))
        with pytest.raises(ValueError):
            ci_precoder(np.eye(2), mode="loose")
