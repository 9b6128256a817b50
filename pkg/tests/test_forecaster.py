"""Tests for path aggregation, interval bounds, calibration, and the full pipeline."""

from __future__ import annotations

import numpy as np
import pytest

from simcast import (
    Aggregator,
    ForecastConfig,
    Frequency,
    PreprocessConfig,
    TimeSeries,
    aggregate_paths,
    build_reference_set,
    calibrate_delta,
    delta_grid,
    forecast,
    interval_bounds,
)

from helpers import make_corpus

SCALING_ONLY = PreprocessConfig(seasonal_adjustment=False, smoothing=False)


class TestDeltaGrid:
    def test_default_step_gives_101_candidates(self):
        grid = delta_grid(0.01)
        assert grid.size == 101
        assert grid[0] == 0.0
        assert grid[-1] == 1.0
        np.testing.assert_allclose(np.diff(grid), 0.01, rtol=0, atol=1e-12)

    def test_coarse_and_awkward_steps_cover_the_endpoint(self):
        np.testing.assert_allclose(delta_grid(0.25), [0.0, 0.25, 0.5, 0.75, 1.0])
        grid = delta_grid(0.3)
        np.testing.assert_allclose(grid, [0.0, 0.3, 0.6, 0.9, 1.0])
        np.testing.assert_allclose(delta_grid(1.0), [0.0, 1.0])

    def test_step_validation(self):
        with pytest.raises(ValueError):
            delta_grid(0.0)
        with pytest.raises(ValueError):
            delta_grid(1.5)


class TestAggregatePaths:
    def test_median_resists_outlier_path(self):
        paths = [[1.0, 2.0], [3.0, 4.0], [100.0, 200.0]]
        np.testing.assert_array_equal(aggregate_paths(paths, Aggregator.MEDIAN), [3.0, 4.0])

    def test_single_path_is_identity_for_all_aggregators(self):
        path = np.array([[2.0, 4.0, 8.0]])
        for agg in Aggregator:
            np.testing.assert_array_equal(aggregate_paths(path, agg, distances=[0.5]), path[0])

    def test_identical_paths_weighted_mean_ignores_distances(self):
        paths = [[5.0, 6.0], [5.0, 6.0]]
        out = aggregate_paths(paths, Aggregator.WEIGHTED_MEAN, distances=[0.1, 99.0])
        np.testing.assert_allclose(out, [5.0, 6.0], rtol=1e-12)

    def test_weighted_mean_prefers_closer_paths(self):
        paths = [[0.0], [10.0]]
        out = aggregate_paths(paths, Aggregator.WEIGHTED_MEAN, distances=[1.0, 9.0])
        assert out[0] == pytest.approx(1.0, rel=1e-6)

    def test_errors(self):
        with pytest.raises(ValueError, match="at least one path"):
            aggregate_paths(np.empty((0, 4)))
        with pytest.raises(ValueError, match="requires neighbour distances"):
            aggregate_paths([[1.0], [2.0]], Aggregator.WEIGHTED_MEAN)


class TestIntervalBounds:
    def test_delta_zero_gives_raw_quantiles(self, rng):
        paths = rng.normal(10, 2, size=(40, 6))
        lower, upper = interval_bounds(paths, alpha=0.05, delta=0.0)
        np.testing.assert_array_equal(lower, np.quantile(paths, 0.025, axis=0))
        np.testing.assert_array_equal(upper, np.quantile(paths, 0.975, axis=0))

    def test_delta_one_on_positive_paths(self, rng):
        paths = rng.uniform(1, 5, size=(30, 4))
        lower, upper = interval_bounds(paths, alpha=0.1, delta=1.0)
        np.testing.assert_allclose(lower, 0.0, atol=1e-12)
        np.testing.assert_allclose(upper, 2 * np.quantile(paths, 0.95, axis=0), rtol=1e-12)

    def test_width_non_decreasing_in_delta_for_positive_quantiles(self, rng):
        paths = rng.uniform(0.5, 8, size=(25, 5))
        widths = []
        for delta in delta_grid(0.05):
            lower, upper = interval_bounds(paths, alpha=0.05, delta=delta)
            widths.append(np.sum(upper - lower))
        assert all(b >= a - 1e-12 for a, b in zip(widths, widths[1:]))

    def test_quantile_ordering_at_delta_zero(self, rng):
        paths = rng.normal(size=(21, 8))
        lower, upper = interval_bounds(paths, alpha=0.2, delta=0.0)
        median = np.median(paths, axis=0)
        assert np.all(lower <= median + 1e-12)
        assert np.all(median <= upper + 1e-12)

    def test_requires_two_paths(self):
        with pytest.raises(ValueError, match="at least two paths"):
            interval_bounds([[1.0, 2.0]], alpha=0.05, delta=0.0)


@pytest.fixture(scope="module")
def reference_set():
    corpus = make_corpus(seed=5, m=80, length=40, horizon=6, period=1)
    return build_reference_set(corpus, target_n=20, horizon=6, frequency=1, config=SCALING_ONLY)


@pytest.fixture(scope="module")
def corpus80():
    return make_corpus(seed=5, m=80, length=40, horizon=6, period=1)


class TestCalibrateDelta:
    def test_returns_grid_member_and_is_deterministic(self, reference_set, corpus80):
        target = TimeSeries("t", Frequency(1), corpus80[3].values[:20], 6)
        cfg = ForecastConfig(distance="l2", k=20, delta_grid_step=0.02)
        first = calibrate_delta(target, reference_set, SCALING_ONLY, cfg)
        second = calibrate_delta(target, reference_set, SCALING_ONLY, cfg)
        assert first.delta_star == second.delta_star
        assert first.delta_star in delta_grid(0.02)
        assert first.skipped is False
        assert first.msis_by_delta.size == delta_grid(0.02).size

    def test_short_target_skips_calibration(self, reference_set):
        target = TimeSeries("t", Frequency(1), np.linspace(10, 20, 12), 6)
        cal = calibrate_delta(target, reference_set, SCALING_ONLY, ForecastConfig(k=5))
        assert cal.delta_star == 0.0
        assert cal.skipped is True

    def test_jumping_holdout_forces_widening(self, corpus80, reference_set):
        # history hovers near 40 while the inner holdout jumps tenfold
        values = np.concatenate([np.full(14, 40.0) + np.sin(np.arange(14)), np.full(6, 400.0)])
        target = TimeSeries("jump", Frequency(1), values, 6)
        cfg = ForecastConfig(distance="l2", k=10)
        cal = calibrate_delta(target, reference_set, SCALING_ONLY, cfg)
        assert cal.skipped is False
        assert cal.delta_star > 0.0
        # the score curve must initially decrease: widening helps
        assert cal.msis_by_delta[1] < cal.msis_by_delta[0]

    def test_well_calibrated_target_keeps_delta_zero(self, corpus80, reference_set):
        target = TimeSeries("t", Frequency(1), corpus80[0].values[:20], 6)
        cfg = ForecastConfig(distance="l2", k=40)
        cal = calibrate_delta(target, reference_set, SCALING_ONLY, cfg)
        if cal.delta_star == 0.0:
            # minimum at the boundary: the curve must be non-decreasing nearby
            assert cal.msis_by_delta[0] <= cal.msis_by_delta[1]


class TestForecast:
    def test_identity_neighbor_returns_raw_future_exactly(self, reference_set):
        rs = reference_set
        entry = rs.entries[17]
        target = TimeSeries("ident", Frequency(1), entry.history, rs.horizon)
        for distance in ("l1", "l2", "dtw"):
            result = forecast(target, rs, SCALING_ONLY, ForecastConfig(distance=distance, k=1))
            assert result.neighbor_ids == (entry.series_id,)
            assert result.neighbor_distances[0] == 0.0
            np.testing.assert_allclose(result.point, entry.future_path, rtol=1e-12)

    def test_invariant_under_reference_reordering(self, corpus80):
        target = TimeSeries("t", Frequency(1), corpus80[10].values[:20], 6)
        cfg = ForecastConfig(distance="l2", k=15)
        rs1 = build_reference_set(corpus80, 20, 6, 1, SCALING_ONLY)
        rs2 = build_reference_set(corpus80[::-1], 20, 6, 1, SCALING_ONLY)
        r1 = forecast(target, rs1, SCALING_ONLY, cfg)
        r2 = forecast(target, rs2, SCALING_ONLY, cfg)
        np.testing.assert_allclose(r1.point, r2.point, rtol=1e-12)
        assert sorted(r1.neighbor_ids) == sorted(r2.neighbor_ids)

    def test_median_with_odd_k_returns_observed_values(self, reference_set, corpus80):
        from simcast import rescale_neighbor_paths, nearest_k
        from simcast.preprocess import preprocess_series

        target = TimeSeries("t", Frequency(1), corpus80[7].values[:20], 6)
        result = forecast(target, reference_set, SCALING_ONLY, ForecastConfig(distance="l2", k=5))
        pre = preprocess_series(target, SCALING_ONLY)
        neighbors = nearest_k(pre.scaled, reference_set, "l2", 5)
        paths = rescale_neighbor_paths(reference_set, [i for i, _ in neighbors], pre)
        for step in range(6):
            assert result.point[step] in paths[:, step]

    def test_scaling_target_scales_all_outputs(self, reference_set, corpus80):
        cfg = ForecastConfig(distance="l2", k=12)
        base = TimeSeries("t", Frequency(1), corpus80[4].values[:20], 6)
        scaled = TimeSeries("t", Frequency(1), 3.0 * corpus80[4].values[:20], 6)
        r1 = forecast(base, reference_set, SCALING_ONLY, cfg)
        r2 = forecast(scaled, reference_set, SCALING_ONLY, cfg)
        np.testing.assert_allclose(r2.point, 3.0 * r1.point, rtol=1e-12)
        np.testing.assert_allclose(r2.lower, 3.0 * r1.lower, rtol=1e-12)
        np.testing.assert_allclose(r2.upper, 3.0 * r1.upper, rtol=1e-12)
        assert r1.delta_star == r2.delta_star

    def test_bounds_contain_median_point_forecast(self, reference_set, corpus80):
        target = TimeSeries("t", Frequency(1), corpus80[9].values[:20], 6)
        result = forecast(target, reference_set, SCALING_ONLY, ForecastConfig(distance="l2", k=30))
        assert np.all(result.lower <= result.point + 1e-9)
        assert np.all(result.point <= result.upper + 1e-9)

    def test_shape_mismatch_messages_name_both_values(self, reference_set):
        bad_n = TimeSeries("t", Frequency(1), np.ones(11), 6)
        with pytest.raises(ValueError, match="11.*20"):
            forecast(bad_n, reference_set)
        bad_h = TimeSeries("t", Frequency(1), np.ones(20), 5)
        with pytest.raises(ValueError, match="5.*6"):
            forecast(bad_h, reference_set)
        bad_freq = TimeSeries("t", Frequency(4), np.ones(20), 6)
        with pytest.raises(ValueError, match="quarterly.*yearly"):
            forecast(bad_freq, reference_set)

    def test_reference_config_is_the_default_preprocessing(self, corpus80):
        # built scaling-only: a forecast without an explicit config must reuse it
        rs = build_reference_set(corpus80, 20, 6, 1, SCALING_ONLY)
        entry = rs.entries[6]
        target = TimeSeries("ident", Frequency(1), entry.history, 6)
        result = forecast(target, rs, forecast_config=ForecastConfig(distance="l2", k=1))
        np.testing.assert_allclose(result.point, entry.future_path, rtol=1e-12)

    def test_calibrate_false_skips_the_grid_search(self, reference_set, corpus80):
        target = TimeSeries("t", Frequency(1), corpus80[11].values[:20], 6)
        cfg = ForecastConfig(distance="l2", k=10)
        fast = forecast(target, reference_set, SCALING_ONLY, cfg, calibrate=False)
        full = forecast(target, reference_set, SCALING_ONLY, cfg, calibrate=True)
        assert fast.calibration_skipped is True
        assert fast.delta_star == 0.0
        np.testing.assert_array_equal(fast.point, full.point)

    def test_result_fields_are_consistent(self, reference_set, corpus80):
        target = TimeSeries("t", Frequency(1), corpus80[2].values[:20], 6)
        result = forecast(target, reference_set, SCALING_ONLY, ForecastConfig(distance="dtw", k=8))
        assert len(result.neighbor_ids) == 8
        assert result.neighbor_distances.size == 8
        assert result.point.size == 6
        assert result.delta_star in delta_grid(0.01)

    def test_calibrated_intervals_approach_nominal_coverage(self):
        # homogeneous corpus: 95% intervals should cover most holdouts
        from simcast.metrics import coverage_stats

        from helpers import ets_like_series

        n, h = 24, 6
        corpus = make_corpus(seed=77, m=2000, length=n + h + 2, horizon=h)
        rs = build_reference_set(corpus, n, h, 1)
        rng = np.random.default_rng(78)
        covered = []
        for _ in range(60):
            values = ets_like_series(rng, n + h)
            target = TimeSeries("t", Frequency(1), values[:n], h)
            result = forecast(target, rs, forecast_config=ForecastConfig(distance="l2", k=100))
            cov, _, _ = coverage_stats(values[n:], result.lower, result.upper, target.values, 1)
            covered.append(cov)
        assert np.mean(covered) > 0.85  # measured ~0.94 against the 0.95 target
