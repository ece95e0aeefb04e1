"""Field evaluation, derivatives, and bandwidth selection."""

import math

import numpy as np
import pytest

from qipf.errors import DegenerateDataError, InvalidArgumentError
from qipf.kernel_field import (
    WeightField,
    effective_sigma,
    evaluate_field,
    gaussian_kernel,
    silverman_bandwidth,
)


def field_value_ld(field, y):
    """Field value in extended precision (oracle-side evaluation)."""
    pts = field.points.astype(np.longdouble)
    s2 = np.longdouble(field.sigma) ** 2
    d = pts - y
    return np.exp(d * d / (-2 * s2)).mean()


def fd_derivatives(field, y, h=1e-5):
    """Central finite differences of the field value (independent oracle).

    Evaluations run in extended precision so the h^-2 cancellation noise
    stays far below the 1e-6 comparison tolerance.
    """
    y = np.longdouble(y)
    h = np.longdouble(h)
    fp, f0, fm = field_value_ld(field, y + h), field_value_ld(field, y), field_value_ld(field, y - h)
    d1 = float((fp - fm) / (2 * h))
    d2 = float((fp - 2 * f0 + fm) / (h * h))
    return d1, d2


class TestGaussianKernel:
    def test_identity_point(self):
        assert gaussian_kernel(3.0, 3.0, 0.5) == 1.0

    def test_unit_distance(self):
        assert gaussian_kernel(0.0, 1.0, 1.0) == pytest.approx(math.exp(-0.5), rel=1e-15)

    def test_far_point_arbitrary_precision(self):
        # mpmath.mp.dps=40: exp(-8) = 3.354626279025118388e-4
        assert gaussian_kernel(0.0, 4.0, 1.0) == pytest.approx(
            3.3546262790251184e-04, rel=1e-14
        )

    def test_bounds(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            w, y = rng.uniform(-5, 5, 2)
            v = gaussian_kernel(w, y, rng.uniform(0.5, 3.0))
            assert 0.0 < v <= 1.0

    @pytest.mark.parametrize(
        "w,y,s", [(math.nan, 0, 1), (0, math.inf, 1), (0, 0, 0.0), (0, 0, -1.0)]
    )
    def test_invalid_inputs(self, w, y, s):
        with pytest.raises(InvalidArgumentError):
            gaussian_kernel(w, y, s)


class TestEvaluateField:
    def test_single_kernel_at_peak(self):
        fe = evaluate_field(WeightField([0.0], 1.0), 0.0)
        assert fe.value == 1.0
        assert fe.d1 == 0.0
        assert fe.d2 == -1.0  # -1/sigma^2

    def test_symmetric_pair(self):
        fe = evaluate_field(WeightField([-1.0, 1.0], 1.0), 0.0)
        assert fe.value == pytest.approx(math.exp(-0.5), rel=1e-15)
        assert fe.d1 == pytest.approx(0.0, abs=1e-16)
        assert fe.d2 == pytest.approx(0.0, abs=1e-16)

    def test_three_point_field_matches_finite_differences(self):
        field = WeightField([0.2, 0.7, 1.3], 0.4)
        fe = evaluate_field(field, 0.5)
        d1, d2 = fd_derivatives(field, 0.5)
        assert fe.d1 == pytest.approx(d1, rel=1e-6)
        assert fe.d2 == pytest.approx(d2, rel=1e-6)

    def test_randomized_fields_match_finite_differences(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            n = rng.integers(2, 1000)
            pts = rng.normal(0, 1, n)
            field = WeightField(pts, rng.uniform(0.3, 2.0))
            y = rng.uniform(-2, 2)
            fe = evaluate_field(field, y)
            h = 1e-5 * max(1.0, abs(y))
            d1, d2 = fd_derivatives(field, y, h)
            assert fe.d1 == pytest.approx(d1, rel=1e-6, abs=1e-9)
            assert fe.d2 == pytest.approx(d2, rel=1e-6, abs=1e-9)

    def test_value_bounded_and_positive(self):
        rng = np.random.default_rng(3)
        field = WeightField(rng.normal(0, 1, 200), 0.5)
        for y in np.linspace(-4, 4, 41):
            v = evaluate_field(field, y).value
            assert 0.0 < v <= 1.0

    def test_unit_value_only_when_all_points_equal_y(self):
        assert evaluate_field(WeightField([2.0, 2.0, 2.0], 1.0), 2.0).value == 1.0
        assert evaluate_field(WeightField([2.0, 2.1], 1.0), 2.0).value < 1.0

    def test_symmetry_zero_gradient_at_center(self):
        rng = np.random.default_rng(11)
        half = rng.normal(1.0, 0.7, 100)
        c = 0.25
        pts = np.concatenate([c + half, c - half])
        fe = evaluate_field(WeightField(pts, 0.8), c)
        assert abs(fe.d1) <= 1e-12

    def test_far_field_decay(self):
        rng = np.random.default_rng(5)
        pts = rng.normal(0, 1, 500)
        sigma = 0.7
        field = WeightField(pts, sigma)
        y = float(pts.mean()) + 8.0 * sigma + float(pts.max() - pts.mean())
        assert evaluate_field(field, y).value < 1e-10

    def test_permutation_invariance(self):
        rng = np.random.default_rng(9)
        pts = rng.normal(0, 1, 777)
        field = WeightField(pts, 0.6)
        shuffled = WeightField(rng.permutation(pts), 0.6)
        for y in (-1.3, 0.0, 0.42, 2.8):
            a = evaluate_field(field, y)
            b = evaluate_field(shuffled, y)
            # fsum is exactly rounded, so reordering changes nothing at all
            assert a.value == b.value
            assert a.d1 == b.d1
            assert a.d2 == b.d2

    def test_field_validation(self):
        with pytest.raises(InvalidArgumentError):
            WeightField([], 1.0)
        with pytest.raises(InvalidArgumentError):
            WeightField([0.0, math.nan], 1.0)
        with pytest.raises(InvalidArgumentError):
            WeightField([0.0], 0.0)
        with pytest.raises(InvalidArgumentError):
            evaluate_field(WeightField([0.0], 1.0), math.inf)


class TestSilvermanBandwidth:
    def test_two_point_hand_computation(self):
        # 0.9 * min(sqrt(1/2), 0.5/1.34) * 2^(-1/5), evaluated independently
        expected = 0.9 * min(math.sqrt(0.5), 0.5 / 1.34) * 2 ** (-0.2)
        got = silverman_bandwidth([0.0, 1.0])
        assert got == pytest.approx(expected, rel=1e-15)
        assert got == pytest.approx(0.29234906976362378, rel=1e-12)

    def test_fixed_seed_normal_draws_against_reference(self):
        rng = np.random.default_rng(2024)
        x = rng.standard_normal(1000)
        # reference computed from first principles on the same draw
        xs = np.sort(x)
        mean = math.fsum(xs.tolist()) / 1000
        var = math.fsum(((xs - mean) ** 2).tolist()) / 999
        q = lambda p: (
            xs[math.floor(999 * p)] * (1 - (999 * p - math.floor(999 * p)))
            + xs[min(math.floor(999 * p) + 1, 999)] * (999 * p - math.floor(999 * p))
        )
        iqr = q(0.75) - q(0.25)
        expected = 0.9 * min(math.sqrt(var), iqr / 1.34) * 1000 ** (-0.2)
        assert silverman_bandwidth(x) == pytest.approx(expected, rel=1e-12)

    def test_all_identical_is_degenerate(self):
        with pytest.raises(DegenerateDataError):
            silverman_bandwidth([5.0, 5.0, 5.0])

    def test_zero_iqr_with_spread_falls_back_to_std(self):
        x = [0.0, 0.0, 0.0, 0.0, 1.0]
        got = silverman_bandwidth(x)
        s = float(np.std(x, ddof=1))
        assert got == pytest.approx(0.9 * s * 5 ** (-0.2), rel=1e-12)
        assert got > 0

    def test_gaussian_rule_variant(self):
        x = np.random.default_rng(1).normal(0, 1, 50)
        s = float(np.std(x, ddof=1))
        assert silverman_bandwidth(x, rule="gaussian") == pytest.approx(
            1.06 * s * 50 ** (-0.2), rel=1e-12
        )

    def test_too_few_samples(self):
        with pytest.raises(InvalidArgumentError):
            silverman_bandwidth([1.0])


class TestEffectiveSigma:
    def test_factor_scales_bandwidth(self):
        x = np.random.default_rng(0).normal(0, 1, 100)
        assert effective_sigma(x, 80.0) == pytest.approx(
            80.0 * silverman_bandwidth(x), rel=1e-15
        )

    def test_identity_factor(self):
        x = [0.0, 0.3, 1.1, 2.0]
        assert effective_sigma(x, 1.0) == silverman_bandwidth(x)

    def test_two_point_doubled(self):
        assert effective_sigma([0.0, 1.0], 2.0) == pytest.approx(0.58469813952724756, rel=1e-12)

    def test_propagates_degenerate(self):
        with pytest.raises(DegenerateDataError):
            effective_sigma([1.0, 1.0], 80.0)

    def test_bad_factor(self):
        with pytest.raises(InvalidArgumentError):
            effective_sigma([0.0, 1.0], 0.0)
