import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from gpsm.specfun import (
    DEFAULT_QUADRATURE,
    QuadratureError,
    QuadratureSpec,
    chi2_2_cdf,
    gaussian_q,
    integrate_semi_infinite,
    lambda_pdf,
    noncentral_chi2_2_pdf,
)


def _ncx2_mp(g, lam):
    g, lam = mpmath.mpf(g), mpmath.mpf(lam)
    return 0.5 * mpmath.exp(-(g + lam) / 2) * mpmath.besseli(0, mpmath.sqrt(lam * g))


class TestGaussianQ:
    def test_ten_percent_point(self):
        assert gaussian_q(1.2816) == pytest.approx(0.1, abs=1e-5)

    def test_matches_mpmath_erfc(self):
        x = np.linspace(-5, 30, 200)
        expected = [float(mpmath.erfc(mpmath.mpf(v) / mpmath.sqrt(2)) / 2) for v in x]
        np.testing.assert_allclose(gaussian_q(x), expected, rtol=1e-12, atol=0)

    def test_deep_tail_positive(self):
        assert 0.0 < gaussian_q(35.0) < 1e-200


class TestChi2Cdf:
    def test_value(self):
        assert chi2_2_cdf(10.0) == pytest.approx(1 - math.exp(-5), rel=1e-15)
        assert chi2_2_cdf(10.0) == pytest.approx(0.99326, abs=1e-5)

    def test_small_argument_keeps_precision(self):
        assert chi2_2_cdf(1e-20) == pytest.approx(5e-21, rel=1e-12)

    def test_agrees_with_scipy(self):
        g = np.linspace(0, 40, 101)
        np.testing.assert_allclose(chi2_2_cdf(g), stats.chi2(2).cdf(g), rtol=1e-12, atol=1e-15)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            chi2_2_cdf(-1.0)


class TestNoncentralChi2:
    def test_bessel_oracle(self):
        assert noncentral_chi2_2_pdf(25.0, 25.0) == pytest.approx(float(_ncx2_mp(25, 25)), rel=1e-12)

    @pytest.mark.parametrize("g, lam", [(0.0, 3.0), (1e-3, 400.0), (900.0, 1000.0), (5.0, 0.0), (3000.0, 2500.0)])
    def test_mpmath_across_range(self, g, lam):
        assert noncentral_chi2_2_pdf(g, lam) == pytest.approx(float(_ncx2_mp(g, lam)), rel=1e-11, abs=1e-300)

    def test_zero_noncentrality_is_central(self):
        g = np.linspace(0, 20, 41)
        np.testing.assert_allclose(noncentral_chi2_2_pdf(g, 0.0), 0.5 * np.exp(-g / 2), rtol=1e-14)

    def test_agrees_with_scipy_ncx2(self):
        g = np.linspace(0.1, 80, 60)
        np.testing.assert_allclose(noncentral_chi2_2_pdf(g, 12.0), stats.ncx2(2, 12.0).pdf(g), rtol=1e-9)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            noncentral_chi2_2_pdf(-1.0, 2.0)


class TestLambdaPdf:
    @pytest.mark.parametrize("n_a", [1, 2, 4])
    def test_is_gamma(self, n_a):
        sigma2_a = 0.4
        lam = np.linspace(0, 200, 50)
        ref = stats.gamma(a=9, scale=2 / (n_a * sigma2_a)).pdf(lam)
        np.testing.assert_allclose(lambda_pdf(lam, 16, 8, n_a, sigma2_a), ref, rtol=1e-11, atol=1e-300)

    @pytest.mark.parametrize("n_a, sigma2_a", [(1, 1.0), (2, 0.05), (4, 3.0)])
    def test_moments_by_quadrature(self, n_a, sigma2_a):
        rate = n_a * sigma2_a / 2
        mean = 9 / rate
        marks = (mean / 2, mean, 2 * mean)

        def moment(p):
            return integrate_semi_infinite(lambda x: x**p * lambda_pdf(x, 16, 8, n_a, sigma2_a), breakpoints=marks, scale=mean)

        assert moment(0) == pytest.approx(1.0, rel=1e-10)
        assert moment(1) == pytest.approx(mean, rel=1e-10)
        assert moment(2) - moment(1) ** 2 == pytest.approx(9 / rate**2, rel=1e-9)

    def test_square_channel_is_exponential(self):
        lam = np.array([0.0, 1.0, 2.0])
        np.testing.assert_allclose(lambda_pdf(lam, 4, 4, 2, 1.0), np.exp(-lam))

    def test_bad_dimensions(self):
        with pytest.raises(ValueError):
            lambda_pdf(1.0, 4, 8, 2, 1.0)
        with pytest.raises(ValueError):
            lambda_pdf(-1.0, 16, 8, 2, 1.0)


class TestQuadrature:
    def test_spec_validation(self):
        with pytest.raises(ValueError):
            QuadratureSpec(node_count=8)
        with pytest.raises(ValueError):
            QuadratureSpec(rel_tolerance=1e-2)
        assert DEFAULT_QUADRATURE.node_count >= 16

    def test_exponential(self):
        assert integrate_semi_infinite(lambda x: np.exp(-x)) == pytest.approx(1.0, rel=1e-12)

    def test_sharp_peak_far_out(self):
        f = lambda x: np.exp(-0.5 * ((x - 5e4) / 3.0) ** 2) / (3.0 * math.sqrt(2 * math.pi))
        assert integrate_semi_infinite(f, breakpoints=(5e4 - 30, 5e4 + 30)) == pytest.approx(1.0, rel=1e-10)

    def test_identically_zero(self):
        assert integrate_semi_infinite(lambda x: np.zeros_like(x)) == 0.0

    def test_heavy_tail_raises(self):
        with pytest.raises(QuadratureError):
            integrate_semi_infinite(lambda x: 1.0 / (1.0 + x))

    def test_nonfinite_raises(self):
        with pytest.raises(QuadratureError):
            integrate_semi_infinite(lambda x: np.full_like(x, np.nan))

    def test_panel_budget(self):
        spec = QuadratureSpec(max_panels=20, rel_tolerance=1e-12)
        with pytest.raises(QuadratureError):
            integrate_semi_infinite(lambda x: np.abs(np.sin(50 * x)) * np.exp(-x / 10), spec)

    @settings(max_examples=40, deadline=None)
    @given(shape=st.integers(1, 40), rate=st.floats(1e-3, 1e3))
    def test_gamma_normalisation(self, shape, rate):
        mean = shape / rate
        f = lambda x: stats.gamma.pdf(x, a=shape, scale=1 / rate)
        assert integrate_semi_infinite(f, breakpoints=(mean,), scale=mean / math.sqrt(shape)) == pytest.approx(1.0, rel=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(lam=st.floats(0.0, 2000.0))
    def test_noncentral_normalisation(self, lam):
        marks = (max(lam - 10 * math.sqrt(lam + 1), 0.0), lam + 2, lam + 10 * math.sqrt(lam + 1))
        total = integrate_semi_infinite(lambda g: noncentral_chi2_2_pdf(g, lam), breakpoints=marks, scale=4.0)
        assert total == pytest.approx(1.0, rel=1e-9)
