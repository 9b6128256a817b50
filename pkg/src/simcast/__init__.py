"""simcast: model-free forecasting from the observed futures of similar series.

A target series is preprocessed (seasonal adjustment, smoothing, origin
scaling), matched against a reference corpus under L1/L2/DTW distance, and
the future paths of its nearest neighbours are aggregated into point
forecasts with calibrated prediction intervals.
"""

from .dataio import (
    CorpusRecord,
    apply_history_cut,
    build_reference_set,
    load_reference_set,
    read_corpus,
    save_reference_set,
)
from .estimator import SimilarityForecaster
from .forecaster import (
    CalibrationResult,
    aggregate_paths,
    calibrate_delta,
    delta_grid,
    forecast,
    interval_bounds,
    rescale_neighbor_paths,
)
from .metrics import (
    EvaluationReport,
    SeriesScores,
    ZeroDenominatorError,
    coverage_stats,
    evaluate_series,
    forecastability,
    mase,
    mcb_ranks,
    msis,
)
from .preprocess import (
    PreprocessedSeries,
    SeasonalAdjustment,
    box_cox,
    guerrero_lambda,
    inverse_box_cox,
    loess_smooth,
    postprocess_forecast,
    preprocess_series,
    seasonal_adjust,
    seasonality_test,
    stl_decompose,
)
from .similarity import distance_dtw, distance_l1, distance_l2, nearest_k, pairwise_distances
from .types import (
    MONTHLY,
    QUARTERLY,
    YEARLY,
    Aggregator,
    Distance,
    ForecastConfig,
    ForecastResult,
    Frequency,
    PreprocessConfig,
    ReferenceSeries,
    ReferenceSet,
    TimeSeries,
    make_time_series,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Aggregator",
    "CalibrationResult",
    "CorpusRecord",
    "Distance",
    "EvaluationReport",
    "ForecastConfig",
    "ForecastResult",
    "Frequency",
    "MONTHLY",
    "PreprocessConfig",
    "PreprocessedSeries",
    "QUARTERLY",
    "ReferenceSeries",
    "ReferenceSet",
    "SeasonalAdjustment",
    "SeriesScores",
    "SimilarityForecaster",
    "TimeSeries",
    "YEARLY",
    "ZeroDenominatorError",
    "aggregate_paths",
    "apply_history_cut",
    "box_cox",
    "build_reference_set",
    "calibrate_delta",
    "coverage_stats",
    "delta_grid",
    "distance_dtw",
    "distance_l1",
    "distance_l2",
    "evaluate_series",
    "forecast",
    "forecastability",
    "guerrero_lambda",
    "interval_bounds",
    "inverse_box_cox",
    "load_reference_set",
    "loess_smooth",
    "make_time_series",
    "mase",
    "mcb_ranks",
    "msis",
    "nearest_k",
    "pairwise_distances",
    "postprocess_forecast",
    "preprocess_series",
    "read_corpus",
    "rescale_neighbor_paths",
    "save_reference_set",
    "seasonal_adjust",
    "seasonality_test",
    "stl_decompose",
]
