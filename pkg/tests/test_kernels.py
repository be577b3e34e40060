"""Kernel evaluators against independent quadrature oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.special import sici

from dirmax.errors import InvalidArgument
from dirmax.kernels import (
    BUMP_AMPLITUDE,
    bump_eval,
    bump_integral,
    fejer_eval,
    fejer_from_vp,
    vp_eval,
    vp_transform,
    zeta_eval,
    zeta_l1_norm,
)


def vp_transform_quadrature(r: float, xi: float) -> float:
    """(1/2pi) * integral V_r(x) exp(i x xi) dx, independent of vp_transform.

    V_r is even, so the transform reduces to (1/pi) * integral_0^inf
    V_r(x) cos(xi x) dx.  The head [0, a] (a few radians of every phase) uses
    adaptive quadrature of vp_eval; from a onward,
    V_r(x) cos(xi x) = sum of +-cos(c x) / (r x^2) over c = r +- xi, 2r +- xi,
    and each term integrates exactly against the sine integral:
    integral_a^inf cos(cx)/x^2 dx = cos(ca)/a - |c| (pi/2 - Si(|c| a)).
    """
    a = 4.0 / r

    val, _err = quad(
        lambda x: vp_eval(r, x) * math.cos(xi * x),
        0.0,
        a,
        limit=400,
        epsabs=1e-13,
        epsrel=1e-13,
    )

    def cos_tail(c: float) -> float:
        c = abs(c)
        if c == 0.0:
            return 1.0 / a
        si, _ = sici(c * a)
        return math.cos(c * a) / a - c * (math.pi / 2.0 - si)

    tail = (
        cos_tail(r - xi) + cos_tail(r + xi) - cos_tail(2 * r - xi) - cos_tail(2 * r + xi)
    ) / r
    return (val + tail) / math.pi


class TestFejer:
    def test_removable_singularity_value(self):
        assert fejer_eval(1.0, 0.0) == pytest.approx(1.0, abs=1e-12)
        assert fejer_eval(3.5, 0.0) == pytest.approx(3.5, abs=1e-12)

    def test_zero_at_full_period(self):
        assert fejer_eval(1.0, 2 * math.pi) == pytest.approx(0.0, abs=1e-12)

    def test_value_against_defining_integral(self):
        # K_2(1): quadrature of integral_{-r}^{r} (1 - |t|/r) exp(-itx) dt
        val, _ = quad(lambda t: (1 - abs(t) / 2.0) * math.cos(t * 1.0), -2.0, 2.0)
        assert fejer_eval(2.0, 1.0) == pytest.approx(val, abs=1e-10)
        assert fejer_eval(2.0, 1.0) == pytest.approx(1.4161468365471424, abs=1e-12)

    def test_scaling_identity(self):
        xs = np.linspace(-30, 30, 1001)
        for r in (0.3, 1.0, 7.0):
            np.testing.assert_allclose(
                fejer_eval(r, xs), r * fejer_eval(1.0, r * xs), rtol=0, atol=1e-12
            )

    @given(st.floats(0.01, 100), st.floats(-1000, 1000))
    @settings(max_examples=200, deadline=None)
    def test_nonnegative(self, r, x):
        assert fejer_eval(r, x) >= 0.0

    def test_rejects_bad_scale(self):
        with pytest.raises(InvalidArgument):
            fejer_eval(0.0, 1.0)
        with pytest.raises(InvalidArgument):
            fejer_eval(-2.0, 1.0)

    def test_indicator_lower_bound_unit_scales(self):
        # (1/2r) 1_{(-r,r)} <= K_r holds on a window of scales around 1
        for r in (1.0, 2.0):
            xs = np.linspace(-r * (1 - 1e-9), r * (1 - 1e-9), 4001)
            assert np.all(fejer_eval(r, xs) >= 1.0 / (2 * r))

    def test_indicator_lower_bound_cross_scale(self):
        # the scale-matched form (1/2d) 1_{(-d,d)} <= K_{1/d} holds for all d
        for d in (0.1, 1.0, 10.0, 100.0):
            xs = np.linspace(-d * (1 - 1e-9), d * (1 - 1e-9), 4001)
            assert np.all(fejer_eval(1.0 / d, xs) >= 1.0 / (2 * d))


class TestValleePoussin:
    def test_center_value(self):
        assert vp_eval(1.0, 0.0) == pytest.approx(3.0, abs=1e-12)

    def test_zero_at_full_period(self):
        assert vp_eval(1.0, 2 * math.pi) == pytest.approx(0.0, abs=1e-12)

    def test_even(self):
        xs = np.linspace(0, 50, 500)
        np.testing.assert_array_equal(vp_eval(2.0, xs), vp_eval(2.0, -xs))

    def test_value_against_inverse_transform(self):
        # V_r(x) = integral of the trapezoid profile against exp(-i xi x)
        r, x = 0.5, 3.0
        val, _ = quad(lambda xi: vp_transform(r, xi) * math.cos(xi * x), 0, 2 * r,
                      limit=200, epsabs=1e-12)
        assert vp_eval(r, x) == pytest.approx(2 * val, abs=1e-8)


class TestVpTransform:
    def test_plateau_slope_cutoff(self):
        assert vp_transform(1.0, 0.0) == 1.0
        assert vp_transform(1.0, 1.5) == 0.5
        assert vp_transform(1.0, 2.0) == 0.0
        assert vp_transform(1.0, -1.5) == 0.5

    @pytest.mark.parametrize("r", [0.1, 1.0, 10.0])
    def test_quadrature_match(self, r):
        for xi in (0.0, 0.5 * r, r, 1.5 * r, 2.0 * r, 3.0 * r):
            assert vp_transform_quadrature(r, xi) == pytest.approx(
                vp_transform(r, xi), abs=1e-6
            )


class TestFejerSeries:
    def test_depth_one_is_half_vp(self):
        xs = np.linspace(-5, 5, 101)
        np.testing.assert_array_equal(
            fejer_from_vp(2.0, xs, 1), 0.5 * vp_eval(1.0, xs)
        )

    def test_converges_at_origin(self):
        assert fejer_from_vp(1.0, 0.0, 20) == pytest.approx(1.0, abs=1e-5)

    def test_truncation_error_bound(self):
        xs = np.linspace(-40, 40, 2001)
        for r in (0.5, 1.0, 2.0):
            err = np.abs(fejer_from_vp(r, xs, 25) - fejer_eval(r, xs))
            assert float(err.max()) <= 1e-9 * r

    def test_matches_direct_at_pi(self):
        assert fejer_from_vp(1.0, math.pi, 25) == pytest.approx(
            fejer_eval(1.0, math.pi), abs=1e-6
        )


class TestBump:
    def test_at_least_one_on_unit_interval(self):
        xs = np.linspace(0.0, 1.0, 10001)
        assert np.all(bump_eval(1.0, xs) >= 1.0)

    def test_nonnegative_everywhere(self):
        xs = np.linspace(-300, 300, 20001)
        assert np.all(bump_eval(1.0, xs) >= 0.0)

    def test_scaling_preserves_integral(self):
        for h in (0.5, 1.0, 3.0):
            val, _ = quad(lambda x: bump_eval(h, x), -4000 * h, 4000 * h,
                          limit=8000, epsabs=1e-10)
            assert val == pytest.approx(bump_integral(), rel=1e-6)

    def test_transform_vanishes_outside_unit_band(self):
        # quadrature of phi against cos/sin at |xi| = 1.2; x^{-4} decay makes
        # the truncation error negligible at L = 2e4
        xi, L = 1.2, 2e4
        re, _ = quad(lambda x: bump_eval(1.0, x) * math.cos(xi * x), -L, L,
                     limit=60000, epsabs=1e-10)
        im, _ = quad(lambda x: bump_eval(1.0, x) * math.sin(xi * x), -L, L,
                     limit=60000, epsabs=1e-10)
        assert abs(complex(re, im)) < 1e-6

    def test_transform_positive_inside_band(self):
        re, _ = quad(lambda x: bump_eval(1.0, x) * math.cos(0.0 * x), -2e4, 2e4,
                     limit=60000, epsabs=1e-10)
        assert re == pytest.approx(bump_integral(), rel=1e-4)


class TestZeta:
    def test_monotone_in_abs(self):
        xs = np.linspace(0, 1e4, 100001)
        vals = zeta_eval(1.0, xs)
        assert np.all(np.diff(vals) <= 0)
        np.testing.assert_array_equal(zeta_eval(1.0, xs), zeta_eval(1.0, -xs))

    @pytest.mark.parametrize("r", [0.01, 1.0, 100.0])
    def test_dominates_vp(self, r):
        # calibrated absolute constant: the worst ratio (about 9) occurs near
        # x = 0 for r just below a power of two
        xs = np.concatenate([np.linspace(-1e4, 1e4, 200001), [0.0]])
        ratio = np.abs(vp_eval(r, xs)) / zeta_eval(r, xs)
        assert np.isfinite(ratio).all()
        assert float(ratio.max()) <= 10.0

    def test_l1_norm_closed_form_and_uniformity(self):
        for r in (0.013, 0.26, 1.0, 3.7, 64.0):
            # sum_k gamma_k 2^{k+1} over the closed-form geometric tail
            assert zeta_l1_norm(r) == zeta_l1_norm(4.0 * r)
            assert 4.0 < zeta_l1_norm(r) <= 8.0

    def test_l1_norm_matches_numeric_integral(self):
        r = 1.0
        # zeta is a step function: integrate the closed form numerically
        xs = np.linspace(0, 2**22, 2**22 + 1)
        vals = zeta_eval(r, xs[:-1] + 0.5 * np.diff(xs))
        est = 2.0 * float(np.sum(vals) * np.diff(xs)[0])
        assert est == pytest.approx(zeta_l1_norm(r), rel=1e-3)
