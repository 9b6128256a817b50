"""Pipeline orchestration: preprocess the target, select neighbours, aggregate
their observed future paths into point forecasts, and calibrate prediction
intervals by a grid search over the widening factor."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dataio import calibration_reference_set
from .metrics import ZeroDenominatorError, scaled_error_denominator
from .preprocess import PreprocessedSeries, postprocess_forecast, preprocess_series
from .similarity import nearest_k
from .types import (
    Aggregator,
    ForecastConfig,
    ForecastResult,
    PreprocessConfig,
    ReferenceSet,
    TimeSeries,
)
from .validation import as_float_array, as_float_matrix, check_unit_interval

__all__ = [
    "CalibrationResult",
    "delta_grid",
    "aggregate_paths",
    "interval_bounds",
    "rescale_neighbor_paths",
    "calibrate_delta",
    "forecast",
]

#: Guard against division by zero in similarity weights.
_WEIGHT_EPSILON = 1e-9


@dataclass(frozen=True, eq=False)
class CalibrationResult:
    """Outcome of the widening-factor grid search.

    ``skipped`` is set when the target is too short for an inner holdout (or
    its scaled-error denominator is zero); ``msis_by_delta`` holds the score
    for every grid candidate when the search ran.
    """

    delta_star: float
    skipped: bool
    msis_by_delta: np.ndarray | None = None


def delta_grid(step: float) -> np.ndarray:
    """Candidate widening factors: multiples of ``step`` from 0 through 1."""
    step = float(step)
    if not 0.0 < step <= 1.0:
        raise ValueError(f"step must lie in (0, 1], got {step}")
    count = int(np.floor(1.0 / step + 1e-9))
    grid = np.round(np.arange(count + 1) * step, 12)
    if grid[-1] > 1.0:
        grid[-1] = 1.0
    if grid[-1] < 1.0:
        grid = np.append(grid, 1.0)
    return grid


def aggregate_paths(paths, aggregator=Aggregator.MEDIAN, distances=None) -> np.ndarray:
    """Collapse the neighbour paths into one per-step point forecast.

    The weighted mean weights each path by the inverse of its neighbour's
    distance (normalized to sum to 1), so closer series count for more.
    """
    P = as_float_matrix(paths)
    if P.shape[0] < 1 or P.size == 0:
        raise ValueError("at least one path is required")
    aggregator = Aggregator(aggregator)
    if aggregator is Aggregator.MEDIAN:
        return np.median(P, axis=0)
    if aggregator is Aggregator.MEAN:
        return P.mean(axis=0)
    if distances is None:
        raise ValueError("weighted-mean aggregation requires neighbour distances")
    d = as_float_array(distances, "distances")
    if d.size != P.shape[0]:
        raise ValueError(f"length mismatch: {P.shape[0]} paths vs {d.size} distances")
    weights = 1.0 / (d + _WEIGHT_EPSILON)
    weights /= weights.sum()
    return weights @ P


def interval_bounds(paths, alpha: float, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-step interval bounds from the empirical path distribution.

    The lower bound is ``(1 - delta)`` times the ``alpha/2`` quantile and the
    upper bound ``(1 + delta)`` times the ``1 - alpha/2`` quantile (linear
    interpolation of order statistics). Requires at least two paths.

    The multiplicative widening is applied literally, so it only widens the
    interval where the quantiles are positive; a negative lower quantile
    grows (narrowing the interval) as delta increases. Series crossing zero
    should be interpreted with that in mind.
    """
    P = as_float_matrix(paths)
    if P.shape[0] < 2:
        raise ValueError(f"at least two paths are required for interval bounds, got {P.shape[0]}")
    alpha = check_unit_interval(alpha, "alpha")
    delta = check_unit_interval(delta, "delta", open_ends=False)
    q_lo = np.quantile(P, alpha / 2.0, axis=0)
    q_hi = np.quantile(P, 1.0 - alpha / 2.0, axis=0)
    return (1.0 - delta) * q_lo, (1.0 + delta) * q_hi


def rescale_neighbor_paths(
    reference_set: ReferenceSet, indices, target_pre: PreprocessedSeries
) -> np.ndarray:
    """Map the selected neighbours' raw future paths onto the target's scale
    and seasonality, returning a (k, horizon) array.

    Each neighbour's future is first normalized by its own origin (the same
    scaling its history received), then re-expanded with the target's origin
    and seasonal state.
    """
    idx = np.asarray(list(indices), dtype=int)
    if idx.size == 0:
        raise ValueError("at least one neighbour index is required")
    normalized = reference_set.normalized_futures[idx]
    period = reference_set.frequency.period
    return np.vstack(
        [
            postprocess_forecast(
                row, target_pre.origin, target_pre.adjustment, period, shift=target_pre.shift
            )
            for row in normalized
        ]
    )


def _path_quantiles(paths: np.ndarray, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    if paths.shape[0] >= 2:
        return (
            np.quantile(paths, alpha / 2.0, axis=0),
            np.quantile(paths, 1.0 - alpha / 2.0, axis=0),
        )
    # Single path: the empirical distribution is a point mass.
    return paths[0].copy(), paths[0].copy()


def _check_target_shape(target: TimeSeries, reference_set: ReferenceSet) -> None:
    if target.n != reference_set.target_n:
        raise ValueError(
            f"target length {target.n} does not match reference set length "
            f"{reference_set.target_n}"
        )
    if target.horizon != reference_set.horizon:
        raise ValueError(
            f"target horizon {target.horizon} does not match reference set horizon "
            f"{reference_set.horizon}"
        )
    if target.frequency != reference_set.frequency:
        raise ValueError(
            f"target frequency {target.frequency.label} does not match reference set "
            f"frequency {reference_set.frequency.label}"
        )


def calibrate_delta(
    target: TimeSeries,
    reference_set: ReferenceSet,
    preprocess_config: PreprocessConfig | None = None,
    forecast_config: ForecastConfig | None = None,
    threads: int = 1,
) -> CalibrationResult:
    """Choose the widening factor that minimizes the scaled interval score on
    an inner holdout.

    The target is split into an inner training series (all but the last
    ``horizon`` values) and an inner test slice; the full pipeline runs on the
    inner series against the reference set rebuilt at the shorter length, and
    every grid candidate is scored against the inner test. Ties resolve to
    the smallest factor. Targets with ``n <= 2 * horizon`` skip calibration
    and fall back to 0.
    """
    fc = forecast_config if forecast_config is not None else ForecastConfig()
    pcfg = preprocess_config if preprocess_config is not None else reference_set.config
    n, h = target.n, target.horizon
    if n <= 2 * h:
        return CalibrationResult(0.0, True)
    _check_target_shape(target, reference_set)
    period = target.frequency.period
    inner = TimeSeries(target.series_id, target.frequency, target.values[: n - h], h)
    inner_actuals = np.asarray(target.values[n - h :])
    try:
        denominator = scaled_error_denominator(inner.values, period)
    except (ZeroDenominatorError, ValueError) as exc:
        warnings.warn(
            f"series {target.series_id!r}: calibration skipped ({exc})",
            UserWarning,
            stacklevel=2,
        )
        return CalibrationResult(0.0, True)
    inner_set = calibration_reference_set(reference_set)
    pre = preprocess_series(inner, pcfg)
    neighbors = nearest_k(pre.scaled, inner_set, fc.distance, fc.k, threads=threads)
    paths = rescale_neighbor_paths(inner_set, [i for i, _ in neighbors], pre)
    q_lo, q_hi = _path_quantiles(paths, fc.alpha)

    grid = delta_grid(fc.delta_grid_step)
    lower = (1.0 - grid)[:, None] * q_lo[None, :]
    upper = (1.0 + grid)[:, None] * q_hi[None, :]
    below = inner_actuals[None, :] < lower
    above = inner_actuals[None, :] > upper
    penalty = (2.0 / fc.alpha) * (
        (lower - inner_actuals[None, :]) * below + (inner_actuals[None, :] - upper) * above
    )
    scores = ((upper - lower) + penalty).mean(axis=1) / denominator
    best = int(np.argmin(scores))  # first minimum: smallest delta wins ties
    return CalibrationResult(float(grid[best]), False, scores)


def forecast(
    target: TimeSeries,
    reference_set: ReferenceSet,
    preprocess_config: PreprocessConfig | None = None,
    forecast_config: ForecastConfig | None = None,
    threads: int = 1,
    calibrate: bool = True,
) -> ForecastResult:
    """Run the full pipeline for one target series.

    Preprocesses the target (with the reference set's config unless another
    is given), selects the nearest neighbours, rescales and reseasonalises
    their future paths, aggregates them into the point forecast, and attaches
    interval bounds widened by the calibrated factor. ``calibrate=False``
    skips the widening grid search (bounds stay at the raw quantiles and the
    result is flagged as calibration-skipped); point forecasts are unaffected.
    """
    fc = forecast_config if forecast_config is not None else ForecastConfig()
    pcfg = preprocess_config if preprocess_config is not None else reference_set.config
    _check_target_shape(target, reference_set)

    pre = preprocess_series(target, pcfg)
    neighbors = nearest_k(pre.scaled, reference_set, fc.distance, fc.k, threads=threads)
    indices = [i for i, _ in neighbors]
    distances = np.array([d for _, d in neighbors])
    paths = rescale_neighbor_paths(reference_set, indices, pre)
    point = aggregate_paths(paths, fc.aggregator, distances)

    if calibrate:
        calibration = calibrate_delta(target, reference_set, pcfg, fc, threads=threads)
    else:
        calibration = CalibrationResult(0.0, True)
    if paths.shape[0] >= 2:
        lower, upper = interval_bounds(paths, fc.alpha, calibration.delta_star)
    else:
        lower = (1.0 - calibration.delta_star) * paths[0]
        upper = (1.0 + calibration.delta_star) * paths[0]
    return ForecastResult(
        point=point,
        lower=lower,
        upper=upper,
        neighbor_ids=tuple(reference_set.entries[i].series_id for i in indices),
        neighbor_distances=distances,
        delta_star=calibration.delta_star,
        calibration_skipped=calibration.skipped,
    )
