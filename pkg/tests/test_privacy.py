import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from dpkalman import (
    NonPositiveSigmaError,
    OutOfDomainError,
    PrivacyConfig,
    ValidationError,
    gaussian_sigma,
    privatize,
    q_function,
    q_inverse,
    sensitivity_bound,
)
from helpers import case_study_system

LN3 = math.log(3.0)


def q_inverse_bisect(delta, lo=-15.0, hi=15.0):
    # independent oracle: bisection on the tail probability
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if q_function(mid) > delta:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestQFunction:
    def test_symmetry_point(self):
        assert q_function(0.0) == 0.5

    def test_deep_tail_underflows(self):
        assert q_function(40.0) < 1e-300

    def test_against_quadrature(self):
        tail, _ = quad(lambda z: math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi), 1.6449, 50.0)
        assert q_function(1.6449) == pytest.approx(tail, abs=1e-10)
        assert q_function(1.6449) == pytest.approx(0.05, abs=1e-4)

    def test_strictly_decreasing(self):
        ys = np.linspace(-6.0, 6.0, 200)
        vals = [q_function(y) for y in ys]
        assert all(a > b for a, b in zip(vals, vals[1:]))


class TestQInverse:
    def test_median(self):
        assert q_inverse(0.5) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize(
        "delta,expected",
        [(0.001, 3.090232), (0.05, 1.644854)],
    )
    def test_against_bisection_oracle(self, delta, expected):
        oracle = q_inverse_bisect(delta)
        assert q_inverse(delta) == pytest.approx(oracle, abs=1e-9)
        assert q_inverse(delta) == pytest.approx(expected, abs=1e-5)

    def test_round_trip_grid(self):
        for delta in [1e-5, 1e-4, 1e-3, 1e-2, 0.1, 0.2, 0.3, 0.4]:
            assert abs(q_function(q_inverse(delta)) - delta) <= 1e-12

    @given(st.floats(1e-6, 1.0 - 1e-6))
    @settings(max_examples=200)
    def test_round_trip_property(self, delta):
        assert abs(q_function(q_inverse(delta)) - delta) <= 1e-12

    def test_tail_quantile_window(self):
        # the calibration regime delta in [1e-5, 1e-1] keeps the quantile within [1, 4.5]
        deltas = np.geomspace(1e-5, 1e-1, 25)
        values = np.array([q_inverse(d) for d in deltas])
        assert values.max() == pytest.approx(4.2649, abs=1e-4)
        assert values.min() == pytest.approx(1.2815, abs=1e-4)
        assert np.all((values >= 1.0) & (values <= 4.5))

    def test_domain(self):
        for bad in (0.0, 1.0, -0.1, 1.5):
            with pytest.raises(OutOfDomainError):
                q_inverse(bad)


class TestSensitivityBound:
    def test_identity(self):
        assert sensitivity_bound(np.eye(3), 1.0) == pytest.approx(1.0)

    def test_diagonal(self):
        assert sensitivity_bound(np.diag([2.0, 1.0]), 3.0) == pytest.approx(6.0)

    def test_matches_unit_sphere_search(self):
        rng = np.random.default_rng(11)
        C = rng.normal(size=(3, 3))
        directions = rng.normal(size=(200_000, 3))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        brute = np.linalg.norm(directions @ C.T, axis=1).max()
        assert sensitivity_bound(C, 1.0) == pytest.approx(brute, abs=1e-3)


class TestGaussianSigma:
    def test_case_study_value(self):
        assert gaussian_sigma(LN3, 0.001, 1.0) == pytest.approx(2.9663, abs=5e-3)
        assert gaussian_sigma(LN3, 0.001, 1.0) == pytest.approx(2.966281680892255, abs=1e-9)

    def test_zero_sensitivity(self):
        assert gaussian_sigma(1.0, 0.05, 0.0) == 0.0

    def test_formula_evaluation(self):
        # direct evaluation with the bisection oracle's quantile
        k = q_inverse_bisect(0.05)
        expected = 2.0 / 2.0 * (k + math.sqrt(k * k + 2.0))
        assert expected == pytest.approx(3.814080091407274, abs=1e-9)
        assert gaussian_sigma(1.0, 0.05, 2.0) == pytest.approx(expected, abs=1e-9)

    def test_domain(self):
        with pytest.raises(OutOfDomainError):
            gaussian_sigma(0.0, 0.05, 1.0)
        with pytest.raises(OutOfDomainError):
            gaussian_sigma(1.0, 0.5, 1.0)
        with pytest.raises(OutOfDomainError):
            gaussian_sigma(1.0, 0.05, -1.0)

    @given(
        st.floats(0.05, 20.0),
        st.floats(0.05, 20.0),
        st.floats(1e-4, 0.45),
        st.floats(0.1, 10.0),
    )
    @settings(max_examples=100)
    def test_strictly_decreasing_in_epsilon(self, e1, e2, delta, sens):
        lo, hi = sorted((e1, e2))
        if hi - lo < 1e-9:
            return
        assert gaussian_sigma(hi, delta, sens) < gaussian_sigma(lo, delta, sens)

    @given(
        st.floats(1e-4, 0.45),
        st.floats(1e-4, 0.45),
        st.floats(0.05, 10.0),
        st.floats(0.1, 10.0),
    )
    @settings(max_examples=100)
    def test_strictly_decreasing_in_delta(self, d1, d2, epsilon, sens):
        lo, hi = sorted((d1, d2))
        if hi - lo < 1e-9:
            return
        assert gaussian_sigma(epsilon, hi, sens) < gaussian_sigma(epsilon, lo, sens)

    @given(st.floats(0.05, 10.0), st.floats(1e-4, 0.45), st.floats(0.1, 10.0), st.floats(0.1, 10.0))
    @settings(max_examples=100)
    def test_linear_in_sensitivity(self, epsilon, delta, sens, c):
        left = gaussian_sigma(epsilon, delta, c * sens)
        right = c * gaussian_sigma(epsilon, delta, sens)
        assert left == pytest.approx(right, rel=1e-12)


class TestPrivatize:
    def test_zero_noise_is_identity(self):
        y = np.arange(12.0).reshape(6, 2)
        out = privatize(y, np.zeros(2), rng_seed=3)
        np.testing.assert_array_equal(out, y)

    def test_deterministic_per_seed(self):
        y = np.zeros((50, 2))
        a = privatize(y, np.array([1.0, 2.0]), rng_seed=9)
        b = privatize(y, np.array([1.0, 2.0]), rng_seed=9)
        np.testing.assert_array_equal(a, b)
        c = privatize(y, np.array([1.0, 2.0]), rng_seed=10)
        assert not np.array_equal(a, c)

    def test_stream_index_splits(self):
        y = np.zeros((50, 2))
        a = privatize(y, np.ones(2), rng_seed=9, stream_index=0)
        b = privatize(y, np.ones(2), rng_seed=9, stream_index=1)
        assert not np.array_equal(a, b)

    def test_sample_variance_concentrates(self):
        T = 100_000
        noise = privatize(np.zeros((T, 2)), np.array([3.0, 3.0]), rng_seed=7)
        for ch in range(2):
            var = noise[:, ch].var(ddof=1)
            assert 8.83 <= var <= 9.17

    def test_lag_one_autocorrelation_negligible(self):
        T = 100_000
        noise = privatize(np.zeros((T, 1)), np.array([1.0]), rng_seed=21)[:, 0]
        centered = noise - noise.mean()
        rho = (centered[:-1] * centered[1:]).mean() / centered.var()
        assert abs(rho) <= 0.01

    def test_rejects_negative_sigma(self):
        with pytest.raises(NonPositiveSigmaError):
            privatize(np.zeros((3, 1)), np.array([-1.0]), rng_seed=0)


class TestPrivacyConfig:
    def test_minimal_scale_by_default(self):
        system = case_study_system()
        cfg = PrivacyConfig.for_system(system, epsilon=LN3, delta=0.001, adjacency_B=1.0)
        assert cfg.sensitivity == pytest.approx(1.0)
        assert cfg.k_delta == pytest.approx(3.090232, abs=1e-5)
        np.testing.assert_allclose(cfg.sigma, np.full(2, 2.966281680892255))

    def test_published_rounding_accepted(self):
        system = case_study_system()
        cfg = PrivacyConfig.for_system(system, epsilon=LN3, delta=0.001, adjacency_B=1.0, sigma=2.96)
        np.testing.assert_allclose(cfg.sigma, [2.96, 2.96])

    def test_grossly_small_scale_rejected(self):
        system = case_study_system()
        with pytest.raises(ValidationError):
            PrivacyConfig.for_system(system, epsilon=LN3, delta=0.001, adjacency_B=1.0, sigma=1.0)

    def test_k_delta_must_match(self):
        with pytest.raises(ValidationError):
            PrivacyConfig(
                epsilon=1.0, delta=0.01, adjacency_B=1.0, sensitivity=1.0,
                k_delta=1.0, sigma=np.array([10.0]),
            )

    def test_oversized_scales_allowed(self):
        system = case_study_system()
        cfg = PrivacyConfig.for_system(system, epsilon=LN3, delta=0.001, adjacency_B=1.0, sigma=[5.0, 6.0])
        np.testing.assert_allclose(cfg.sigma, [5.0, 6.0])
