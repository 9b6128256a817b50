"""Tests for the shared domain types and their validity rules."""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from simcast import (
    Aggregator,
    Distance,
    ForecastConfig,
    ForecastResult,
    Frequency,
    PreprocessConfig,
    make_time_series,
)
from simcast.types import default_span_factor


class TestFrequency:
    def test_labels_round_trip(self):
        for label, period in [("yearly", 1), ("quarterly", 4), ("monthly", 12), ("other:13", 13)]:
            freq = Frequency.from_label(label)
            assert freq.period == period
            assert freq.label == label

    def test_unknown_label(self):
        with pytest.raises(ValueError, match="unknown frequency label"):
            Frequency.from_label("weekly")

    def test_period_must_be_positive(self):
        with pytest.raises(ValueError):
            Frequency(0)


class TestMakeTimeSeries:
    def test_valid_constructor(self):
        ts = make_time_series("a", 1, [1, 2, 3], 2)
        assert ts.n == 3
        assert ts.horizon == 2
        assert ts.frequency == Frequency(1)
        np.testing.assert_array_equal(ts.values, [1.0, 2.0, 3.0])

    def test_empty_series(self):
        with pytest.raises(ValueError, match="empty series"):
            make_time_series("a", 12, [], 6)

    def test_non_finite_reports_index(self):
        with pytest.raises(ValueError, match="index 1"):
            make_time_series("a", 4, [1, float("nan")], 8)
        with pytest.raises(ValueError, match="index 0"):
            make_time_series("a", 4, [float("inf"), 1], 8)

    def test_horizon_must_be_positive(self):
        with pytest.raises(ValueError):
            make_time_series("a", 1, [1.0], 0)

    def test_round_trip_identity(self, rng):
        values = rng.normal(size=17)
        ts = make_time_series("id-9", 4, values, 8)
        assert ts.series_id == "id-9"
        assert ts.frequency.period == 4
        np.testing.assert_array_equal(ts.values, values)

    def test_values_are_read_only(self):
        ts = make_time_series("a", 1, [1, 2, 3], 1)
        with pytest.raises(ValueError):
            ts.values[0] = 99.0
        with pytest.raises(dataclasses.FrozenInstanceError):
            ts.horizon = 4


class TestPreprocessConfig:
    def test_span_factor_defaults(self):
        assert default_span_factor(1) == 0.7
        assert default_span_factor(4) == 0.7
        assert default_span_factor(12) == 1.3
        assert default_span_factor(5) == 1.0

    def test_resolve_materializes_default(self):
        cfg = PreprocessConfig()
        assert cfg.span_factor is None
        assert cfg.resolve(Frequency(12)).span_factor == 1.3
        assert cfg.resolve(Frequency(1)).span_factor == 0.7
        explicit = PreprocessConfig(span_factor=2.0)
        assert explicit.resolve(Frequency(12)).span_factor == 2.0

    def test_validation(self):
        with pytest.raises(ValueError):
            PreprocessConfig(span_factor=0.0)
        with pytest.raises(ValueError):
            PreprocessConfig(acf_confidence_z=-1.0)
        with pytest.raises(ValueError):
            PreprocessConfig(lambda_range=(0.5, 0.2))
        with pytest.raises(ValueError):
            PreprocessConfig(lambda_range=(-0.1, 1.0))

    def test_dict_round_trip(self):
        cfg = PreprocessConfig(span_factor=1.3, lambda_range=(0.1, 0.9), smoothing=False)
        assert PreprocessConfig.from_dict(cfg.to_dict()) == cfg


class TestForecastConfig:
    def test_defaults_match_headline_method(self):
        cfg = ForecastConfig()
        assert cfg.distance is Distance.DTW
        assert cfg.k == 500
        assert cfg.aggregator is Aggregator.MEDIAN
        assert cfg.alpha == 0.05
        assert cfg.delta_grid_step == 0.01

    def test_string_coercion(self):
        cfg = ForecastConfig(distance="l2", aggregator="wmean")
        assert cfg.distance is Distance.L2
        assert cfg.aggregator is Aggregator.WEIGHTED_MEAN

    def test_validation(self):
        with pytest.raises(ValueError):
            ForecastConfig(k=0)
        with pytest.raises(ValueError):
            ForecastConfig(alpha=1.0)
        with pytest.raises(ValueError):
            ForecastConfig(delta_grid_step=0.0)
        with pytest.raises(ValueError):
            ForecastConfig(distance="cosine")

    def test_dict_round_trip(self):
        cfg = ForecastConfig(distance="l1", k=7, aggregator="mean", alpha=0.1, delta_grid_step=0.25)
        assert ForecastConfig.from_dict(cfg.to_dict()) == cfg


class TestForecastResult:
    def test_distance_ordering_enforced(self):
        with pytest.raises(ValueError, match="non-decreasing"):
            ForecastResult(
                point=[1.0],
                lower=[0.5],
                upper=[1.5],
                neighbor_ids=("a", "b"),
                neighbor_distances=[2.0, 1.0],
                delta_star=0.0,
            )
        with pytest.raises(ValueError, match="non-negative"):
            ForecastResult(
                point=[1.0],
                lower=[0.5],
                upper=[1.5],
                neighbor_ids=("a",),
                neighbor_distances=[-1.0],
                delta_star=0.0,
            )

    def test_delta_star_in_unit_interval(self):
        with pytest.raises(ValueError):
            ForecastResult(
                point=[1.0],
                lower=[0.5],
                upper=[1.5],
                neighbor_ids=("a",),
                neighbor_distances=[0.0],
                delta_star=1.5,
            )
