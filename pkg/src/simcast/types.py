"""Domain types shared across the forecasting pipeline.

Everything here is an immutable value object: arrays are stored read-only, so
instances can be shared freely across threads without synchronization.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np

from .validation import (
    as_float_array,
    check_positive_int,
    check_unit_interval,
    readonly_array,
)

if TYPE_CHECKING:  # pragma: no cover - import cycle guard, typing only
    from .preprocess import PreprocessedSeries

_LABEL_TO_PERIOD = {"yearly": 1, "quarterly": 4, "monthly": 12}
_PERIOD_TO_LABEL = {1: "yearly", 4: "quarterly", 12: "monthly"}

#: Loess span multipliers per seasonal period; less smoothing suits the short,
#: smooth yearly/quarterly series while monthly series prefer more.
SPAN_FACTOR_DEFAULTS = {1: 0.7, 4: 0.7, 12: 1.3}


def default_span_factor(period: int) -> float:
    """Default smoothing-span multiplier for a seasonal period."""
    return SPAN_FACTOR_DEFAULTS.get(period, 1.0)


@dataclass(frozen=True)
class Frequency:
    """Observations per seasonal cycle; ``period == 1`` means non-seasonal."""

    period: int

    def __post_init__(self):
        object.__setattr__(self, "period", check_positive_int(self.period, "period"))

    @classmethod
    def from_label(cls, label: str) -> "Frequency":
        """Parse ``yearly``/``quarterly``/``monthly`` or ``other:<period>``."""
        key = str(label).strip().lower()
        if key in _LABEL_TO_PERIOD:
            return cls(_LABEL_TO_PERIOD[key])
        if key.startswith("other:"):
            try:
                return cls(int(key.split(":", 1)[1]))
            except (TypeError, ValueError):
                pass
        raise ValueError(
            f"unknown frequency label {label!r}; expected yearly, quarterly, "
            f"monthly, or other:<period>"
        )

    @property
    def label(self) -> str:
        return _PERIOD_TO_LABEL.get(self.period, f"other:{self.period}")


YEARLY = Frequency(1)
QUARTERLY = Frequency(4)
MONTHLY = Frequency(12)


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """A target series: identified, frequency-tagged values plus a horizon."""

    series_id: str
    frequency: Frequency
    values: np.ndarray
    horizon: int

    def __post_init__(self):
        if not isinstance(self.frequency, Frequency):
            object.__setattr__(self, "frequency", Frequency(int(self.frequency)))
        object.__setattr__(
            self, "values", readonly_array(as_float_array(self.values, "values"))
        )
        object.__setattr__(self, "horizon", check_positive_int(self.horizon, "horizon"))

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.n


def make_time_series(series_id, frequency, values, horizon) -> TimeSeries:
    """Build a validated :class:`TimeSeries` from plain Python values."""
    if not isinstance(frequency, Frequency):
        frequency = Frequency(int(frequency))
    return TimeSeries(str(series_id), frequency, values, horizon)


class Distance(str, Enum):
    """Distance measure used to compare preprocessed series."""

    L1 = "l1"
    L2 = "l2"
    DTW = "dtw"


class Aggregator(str, Enum):
    """Operator that collapses neighbour future paths into a point forecast."""

    MEDIAN = "median"
    MEAN = "mean"
    WEIGHTED_MEAN = "wmean"


@dataclass(frozen=True)
class PreprocessConfig:
    """Knobs for the preprocessing steps (seasonal adjustment, smoothing, scaling).

    ``span_factor=None`` means "use the per-frequency default" and is resolved
    against a concrete frequency with :meth:`resolve` before any series is
    preprocessed.
    """

    acf_confidence_z: float = 1.645
    span_factor: float | None = None
    lambda_range: tuple[float, float] = (0.0, 1.0)
    seasonal_adjustment: bool = True
    smoothing: bool = True

    def __post_init__(self):
        if float(self.acf_confidence_z) <= 0:
            raise ValueError(f"acf_confidence_z must be > 0, got {self.acf_confidence_z}")
        object.__setattr__(self, "acf_confidence_z", float(self.acf_confidence_z))
        if self.span_factor is not None:
            if float(self.span_factor) <= 0:
                raise ValueError(f"span_factor must be > 0, got {self.span_factor}")
            object.__setattr__(self, "span_factor", float(self.span_factor))
        lo, hi = (float(v) for v in self.lambda_range)
        if not (0.0 <= lo <= hi <= 1.0):
            raise ValueError(
                f"lambda_range must be a closed interval within [0, 1], got {self.lambda_range}"
            )
        object.__setattr__(self, "lambda_range", (lo, hi))
        object.__setattr__(self, "seasonal_adjustment", bool(self.seasonal_adjustment))
        object.__setattr__(self, "smoothing", bool(self.smoothing))

    def resolve(self, frequency: Frequency) -> "PreprocessConfig":
        """Materialize the per-frequency ``span_factor`` default."""
        if self.span_factor is not None:
            return self
        return replace(self, span_factor=default_span_factor(frequency.period))

    def to_dict(self) -> dict:
        return {
            "acf_confidence_z": self.acf_confidence_z,
            "span_factor": self.span_factor,
            "lambda_range": list(self.lambda_range),
            "seasonal_adjustment": self.seasonal_adjustment,
            "smoothing": self.smoothing,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PreprocessConfig":
        return cls(
            acf_confidence_z=data["acf_confidence_z"],
            span_factor=data["span_factor"],
            lambda_range=tuple(data["lambda_range"]),
            seasonal_adjustment=data["seasonal_adjustment"],
            smoothing=data["smoothing"],
        )


@dataclass(frozen=True)
class ForecastConfig:
    """Neighbour selection, aggregation, and interval-calibration settings."""

    distance: Distance = Distance.DTW
    k: int = 500
    aggregator: Aggregator = Aggregator.MEDIAN
    alpha: float = 0.05
    delta_grid_step: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "distance", Distance(self.distance))
        object.__setattr__(self, "aggregator", Aggregator(self.aggregator))
        object.__setattr__(self, "k", check_positive_int(self.k, "k"))
        object.__setattr__(self, "alpha", check_unit_interval(self.alpha, "alpha"))
        step = float(self.delta_grid_step)
        if not 0.0 < step <= 1.0:
            raise ValueError(f"delta_grid_step must lie in (0, 1], got {self.delta_grid_step}")
        object.__setattr__(self, "delta_grid_step", step)

    def to_dict(self) -> dict:
        return {
            "distance": self.distance.value,
            "k": self.k,
            "aggregator": self.aggregator.value,
            "alpha": self.alpha,
            "delta_grid_step": self.delta_grid_step,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ForecastConfig":
        return cls(**data)


@dataclass(frozen=True, eq=False)
class ReferenceSeries:
    """One truncated reference series: raw window plus its preprocessed state."""

    series_id: str
    history: np.ndarray
    future_path: np.ndarray
    preprocessed: "PreprocessedSeries"

    def __post_init__(self):
        object.__setattr__(self, "history", readonly_array(as_float_array(self.history, "history")))
        object.__setattr__(
            self, "future_path", readonly_array(as_float_array(self.future_path, "future_path"))
        )

    @property
    def preprocessed_history(self) -> np.ndarray:
        return self.preprocessed.scaled


@dataclass(frozen=True, eq=False)
class ReferenceSet:
    """Immutable corpus of truncated, preprocessed reference series.

    Every entry's history has exactly ``target_n`` values and its future path
    exactly ``horizon`` values; rebuilding for another target length produces
    a new set.
    """

    target_n: int
    horizon: int
    frequency: Frequency
    entries: tuple[ReferenceSeries, ...]
    config: PreprocessConfig

    def __post_init__(self):
        object.__setattr__(self, "target_n", check_positive_int(self.target_n, "target_n"))
        object.__setattr__(self, "horizon", check_positive_int(self.horizon, "horizon"))
        if not isinstance(self.frequency, Frequency):
            object.__setattr__(self, "frequency", Frequency(int(self.frequency)))
        object.__setattr__(self, "entries", tuple(self.entries))
        if not self.entries:
            raise ValueError("empty reference set: at least one entry is required")
        if self.config.span_factor is None:
            raise ValueError("reference set config must be resolved (span_factor set)")
        for entry in self.entries:
            if entry.history.size != self.target_n:
                raise ValueError(
                    f"reference series {entry.series_id!r} history length "
                    f"{entry.history.size} does not match target_n {self.target_n}"
                )
            if entry.future_path.size != self.horizon:
                raise ValueError(
                    f"reference series {entry.series_id!r} future length "
                    f"{entry.future_path.size} does not match horizon {self.horizon}"
                )
            if entry.preprocessed.scaled.size != self.target_n:
                raise ValueError(
                    f"reference series {entry.series_id!r} preprocessed length "
                    f"{entry.preprocessed.scaled.size} does not match target_n {self.target_n}"
                )

    @property
    def m(self) -> int:
        return len(self.entries)

    @cached_property
    def preprocessed_matrix(self) -> np.ndarray:
        """All preprocessed histories stacked into an (m, target_n) array."""
        return readonly_array(np.vstack([e.preprocessed.scaled for e in self.entries]))

    @cached_property
    def normalized_futures(self) -> np.ndarray:
        """Each raw future path pushed through its own origin scaling, (m, horizon)."""
        futures = np.vstack([e.future_path for e in self.entries])
        shifts = np.array([e.preprocessed.shift for e in self.entries])
        origins = np.array([e.preprocessed.origin for e in self.entries])
        return readonly_array((futures + shifts[:, None]) / origins[:, None])


@dataclass(frozen=True, eq=False)
class ForecastResult:
    """Point forecasts, calibrated interval bounds, and neighbour diagnostics."""

    point: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    neighbor_ids: tuple[str, ...]
    neighbor_distances: np.ndarray
    delta_star: float
    calibration_skipped: bool = False

    def __post_init__(self):
        for name in ("point", "lower", "upper"):
            object.__setattr__(self, name, readonly_array(as_float_array(getattr(self, name), name)))
        object.__setattr__(self, "neighbor_ids", tuple(self.neighbor_ids))
        dists = readonly_array(
            as_float_array(self.neighbor_distances, "neighbor_distances")
        )
        if np.any(dists < 0):
            raise ValueError("neighbor_distances must be non-negative")
        if np.any(np.diff(dists) < 0):
            raise ValueError("neighbor_distances must be non-decreasing")
        object.__setattr__(self, "neighbor_distances", dists)
        object.__setattr__(self, "delta_star", check_unit_interval(self.delta_star, "delta_star", open_ends=False))
