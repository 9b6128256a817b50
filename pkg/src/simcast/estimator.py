"""Scikit-learn style estimator wrapping the similarity-forecasting pipeline.

``SimilarityForecaster`` follows the fit/predict convention (and supports
``get_params``/``set_params``/``clone``), so the forecaster slots into
standard model-selection tooling such as grid search over ``k`` or the
distance measure.
"""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .dataio import CorpusRecord, build_reference_set
from .forecaster import forecast as run_forecast
from .types import (
    ForecastConfig,
    ForecastResult,
    Frequency,
    PreprocessConfig,
    ReferenceSet,
    TimeSeries,
)

__all__ = ["SimilarityForecaster"]


class SimilarityForecaster(BaseEstimator):
    """Forecast a target series from the observed futures of similar series.

    No statistical model is fit: the reference corpus supplied to
    :meth:`fit` is preprocessed and stored, and :meth:`predict` looks up the
    ``k`` series most similar to each target, aggregating their future paths
    into point forecasts (with calibrated interval bounds available through
    :meth:`predict_interval` / :meth:`forecast`).

    Parameters
    ----------
    k : int, default=500
        Number of similar reference series whose futures are aggregated.
    distance : {"l1", "l2", "dtw"}, default="dtw"
        Distance measure applied to the preprocessed histories.
    aggregator : {"median", "mean", "wmean"}, default="median"
        Operator that collapses the k future paths per horizon step.
    alpha : float, default=0.05
        Miss rate of the prediction intervals (0.05 gives 95% intervals).
    delta_grid_step : float, default=0.01
        Resolution of the interval-widening grid search.
    seasonal_adjustment, smoothing : bool, default=True
        Toggles for the preprocessing steps.
    span_factor : float or None, default=None
        Loess span multiplier; None selects the per-frequency default.
    acf_confidence_z : float, default=1.645
        Threshold multiplier of the seasonality test (1.645 = 90% level).
    lambda_range : pair of floats, default=(0.0, 1.0)
        Search interval for the Box-Cox transform parameter.
    threads : int, default=1
        Worker threads for distance computation (never affects results).

    Examples
    --------
    >>> import numpy as np
    >>> rng = np.random.default_rng(0)
    >>> corpus = rng.uniform(1, 2, size=(50, 30)).cumsum(axis=1)
    >>> est = SimilarityForecaster(k=10, distance="l2")
    >>> est.fit(corpus, horizon=6, frequency=1)
    SimilarityForecaster(distance='l2', k=10)
    >>> est.predict(corpus[0, :24]).shape
    (6,)
    """

    def __init__(
        self,
        k: int = 500,
        distance: str = "dtw",
        aggregator: str = "median",
        alpha: float = 0.05,
        delta_grid_step: float = 0.01,
        seasonal_adjustment: bool = True,
        smoothing: bool = True,
        span_factor: float | None = None,
        acf_confidence_z: float = 1.645,
        lambda_range: tuple[float, float] = (0.0, 1.0),
        threads: int = 1,
    ):
        self.k = k
        self.distance = distance
        self.aggregator = aggregator
        self.alpha = alpha
        self.delta_grid_step = delta_grid_step
        self.seasonal_adjustment = seasonal_adjustment
        self.smoothing = smoothing
        self.span_factor = span_factor
        self.acf_confidence_z = acf_confidence_z
        self.lambda_range = lambda_range
        self.threads = threads

    def _preprocess_config(self) -> PreprocessConfig:
        return PreprocessConfig(
            acf_confidence_z=self.acf_confidence_z,
            span_factor=self.span_factor,
            lambda_range=tuple(self.lambda_range),
            seasonal_adjustment=self.seasonal_adjustment,
            smoothing=self.smoothing,
        )

    def _forecast_config(self) -> ForecastConfig:
        return ForecastConfig(
            distance=self.distance,
            k=self.k,
            aggregator=self.aggregator,
            alpha=self.alpha,
            delta_grid_step=self.delta_grid_step,
        )

    def fit(self, X, y=None, *, n: int | None = None, horizon: int | None = None, frequency=None):
        """Build (or adopt) the reference set.

        ``X`` may be a prebuilt :class:`ReferenceSet`, a sequence of
        :class:`CorpusRecord`/:class:`TimeSeries`, a 2-D array whose rows are
        equal-length reference windows, or a sequence of 1-D arrays. Unless a
        ReferenceSet is passed, ``horizon`` and ``frequency`` are required;
        ``n`` defaults to the longest usable history (row length minus
        horizon for rectangular input).

        ``y`` is ignored; it exists for scikit-learn API compatibility.

        Preprocessing parameters take effect here, at fit time: they shape
        the reference set, and predictions preprocess targets with the fitted
        set's config so both sides always match. Adopting a prebuilt
        ReferenceSet whose config disagrees with this estimator's parameters
        triggers a warning (the set's config wins).
        """
        if isinstance(X, ReferenceSet):
            mine = self._preprocess_config().resolve(X.frequency)
            if mine != X.config:
                warnings.warn(
                    "estimator preprocessing parameters differ from the fitted "
                    "reference set's config; the set's config governs predictions",
                    UserWarning,
                    stacklevel=2,
                )
            self.reference_set_ = X
            return self
        if horizon is None or frequency is None:
            raise ValueError("horizon and frequency are required unless X is a ReferenceSet")
        if not isinstance(frequency, Frequency):
            frequency = Frequency(int(frequency))
        records = self._as_records(X, frequency, horizon)
        if n is None:
            n = max(r.values.size for r in records) - horizon
            if n < 1:
                raise ValueError("reference series are too short for the requested horizon")
        self.reference_set_ = build_reference_set(
            records, n, horizon, frequency, self._preprocess_config(), threads=self.threads
        )
        return self

    @staticmethod
    def _as_records(X, frequency: Frequency, horizon: int) -> list[CorpusRecord]:
        if hasattr(X, "ndim") and getattr(X, "ndim", 1) == 2:
            return [
                CorpusRecord(f"ref{i}", frequency, np.asarray(row, dtype=float), horizon)
                for i, row in enumerate(X)
            ]
        records = []
        for i, item in enumerate(X):
            if isinstance(item, CorpusRecord):
                records.append(item)
            elif isinstance(item, TimeSeries):
                records.append(CorpusRecord(item.series_id, item.frequency, item.values, horizon))
            else:
                records.append(
                    CorpusRecord(f"ref{i}", frequency, np.asarray(item, dtype=float), horizon)
                )
        return records

    def _as_targets(self, X) -> tuple[list[TimeSeries], bool]:
        rs: ReferenceSet = self.reference_set_
        if isinstance(X, TimeSeries):
            return [X], True
        arr = np.asarray(X, dtype=float) if not isinstance(X, (list, tuple)) else X
        if isinstance(arr, np.ndarray) and arr.ndim == 1:
            return [TimeSeries("target", rs.frequency, arr, rs.horizon)], True
        targets = []
        for i, item in enumerate(X):
            if isinstance(item, TimeSeries):
                targets.append(item)
            else:
                targets.append(
                    TimeSeries(f"target{i}", rs.frequency, np.asarray(item, dtype=float), rs.horizon)
                )
        return targets, False

    def forecast(self, X) -> ForecastResult | list[ForecastResult]:
        """Full forecast results (points, bounds, neighbours) for each target."""
        check_is_fitted(self, "reference_set_")
        targets, single = self._as_targets(X)
        fcfg = self._forecast_config()
        # targets are preprocessed with the fitted set's config (see fit)
        results = [
            run_forecast(ts, self.reference_set_, None, fcfg, threads=self.threads)
            for ts in targets
        ]
        return results[0] if single else results

    def predict(self, X) -> np.ndarray:
        """Point forecasts: shape (horizon,) for a single target, else
        (n_targets, horizon)."""
        result = self.forecast(X)
        if isinstance(result, ForecastResult):
            return np.asarray(result.point)
        return np.vstack([r.point for r in result])

    def predict_interval(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Calibrated (lower, upper) interval bounds, shaped like :meth:`predict`."""
        result = self.forecast(X)
        if isinstance(result, ForecastResult):
            return np.asarray(result.lower), np.asarray(result.upper)
        return np.vstack([r.lower for r in result]), np.vstack([r.upper for r in result])
