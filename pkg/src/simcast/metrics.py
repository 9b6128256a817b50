"""Evaluation measures: scaled point and interval errors, coverage, spectral
forecastability, and mean-rank comparisons across methods."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import signal, stats

from .validation import as_float_array, check_unit_interval

__all__ = [
    "ZeroDenominatorError",
    "scaled_error_denominator",
    "mase",
    "msis",
    "coverage_stats",
    "forecastability",
    "mcb_ranks",
    "nemenyi_critical_value",
    "SeriesScores",
    "EvaluationReport",
    "evaluate_series",
]


class ZeroDenominatorError(ValueError):
    """The in-sample seasonal-naive error is zero, so scaled metrics are undefined."""


def scaled_error_denominator(insample, period: int) -> float:
    """Mean absolute seasonal-naive in-sample error: the scaling term shared by
    MASE, MSIS, and spread."""
    y = as_float_array(insample, "insample")
    s = int(period)
    if s < 1:
        raise ValueError(f"period must be >= 1, got {period}")
    if y.size <= s:
        raise ValueError(
            f"in-sample series must be longer than the seasonal period ({y.size} <= {s})"
        )
    denom = float(np.mean(np.abs(y[s:] - y[:-s])))
    if denom <= 0.0:
        raise ZeroDenominatorError(
            "seasonal-naive in-sample error is zero; scaled metrics are undefined"
        )
    return denom


def _check_holdout(actuals, *others, names=()):
    arrays = [as_float_array(actuals, "actuals")]
    for arr, name in zip(others, names):
        arr = as_float_array(arr, name)
        if arr.size != arrays[0].size:
            raise ValueError(f"length mismatch: actuals has {arrays[0].size} values, {name} has {arr.size}")
        arrays.append(arr)
    return arrays


def mase(actuals, forecasts, insample, period: int) -> float:
    """Mean absolute scaled error of point forecasts over the holdout."""
    a, f = _check_holdout(actuals, forecasts, names=("forecasts",))
    return float(np.mean(np.abs(a - f))) / scaled_error_denominator(insample, period)


def msis(actuals, lower, upper, insample, period: int, alpha: float = 0.05) -> float:
    """Mean scaled interval score: interval width plus 2/alpha-weighted
    penalties for actuals falling outside the bounds, scaled like MASE."""
    alpha = check_unit_interval(alpha, "alpha")
    a, lo, hi = _check_holdout(actuals, lower, upper, names=("lower", "upper"))
    penalty = (2.0 / alpha) * ((lo - a) * (a < lo) + (a - hi) * (a > hi))
    score = float(np.mean((hi - lo) + penalty))
    return score / scaled_error_denominator(insample, period)


def coverage_stats(actuals, lower, upper, insample, period: int) -> tuple[float, float, float]:
    """(coverage, upper coverage, spread) of an interval forecast.

    Coverage counts actuals strictly inside the bounds; upper coverage counts
    actuals strictly below the upper bound; spread is the mean interval width
    scaled by the MASE denominator.
    """
    a, lo, hi = _check_holdout(actuals, lower, upper, names=("lower", "upper"))
    coverage = float(np.mean((lo < a) & (a < hi)))
    upper_coverage = float(np.mean(a < hi))
    spread = float(np.mean(hi - lo)) / scaled_error_denominator(insample, period)
    return coverage, upper_coverage, spread


def _modified_daniell_kernel(m: int) -> np.ndarray:
    weights = np.full(2 * m + 1, 1.0 / (2 * m))
    weights[0] = weights[-1] = 1.0 / (4 * m)
    return weights


def forecastability(values) -> float:
    """Spectral-entropy forecastability: ``1 + sum(p * log p)`` over a
    normalized, Daniell-smoothed periodogram.

    A value near 1 means the spectrum is concentrated (strong signal, easy to
    forecast); flat-spectrum noise scores much lower. Constant series have a
    degenerate spectrum and are treated as maximally forecastable (1.0).
    """
    x = as_float_array(values)
    if x.size < 8:
        raise ValueError(f"need at least 8 observations, got {x.size}")
    x = x - x.mean()
    if not np.any(x):
        warnings.warn(
            "constant series: spectrum is degenerate, treating as maximally forecastable",
            UserWarning,
            stacklevel=2,
        )
        return 1.0
    _, psd = signal.periodogram(x, detrend=False)
    psd = psd[1:]  # drop the (zero) mean frequency
    m = max(1, round(math.sqrt(psd.size) / 2))
    kernel = _modified_daniell_kernel(m)
    smoothed = np.convolve(psd, kernel, mode="same")
    smoothed /= np.convolve(np.ones_like(psd), kernel, mode="same")
    total = smoothed.sum()
    if total <= 0:
        warnings.warn(
            "degenerate spectrum, treating as maximally forecastable",
            UserWarning,
            stacklevel=2,
        )
        return 1.0
    p = smoothed / total
    nonzero = p > 0
    return 1.0 + float(np.sum(p[nonzero] * np.log(p[nonzero])))


def nemenyi_critical_value(n_methods: int, alpha: float = 0.05) -> float:
    """Studentized-range-based constant for rank-interval half-widths."""
    if n_methods < 2:
        raise ValueError(f"need at least 2 methods, got {n_methods}")
    return float(stats.studentized_range.ppf(1.0 - alpha, n_methods, np.inf) / math.sqrt(2.0))


def mcb_ranks(
    per_series_scores: Mapping[str, Sequence[float]],
    alpha: float = 0.05,
    critical_value: float | None = None,
) -> dict[str, tuple[float, float, float]]:
    """Mean ranks with comparison intervals for several methods' per-series scores.

    Scores are losses (lower is better, rank 1 = best; ties share the average
    rank). The interval half-width is ``critical_value * sqrt(K*(K+1)/(12*N))``
    with K methods and N series; by default the critical value is the Nemenyi
    constant at the requested level. Methods whose intervals overlap are not
    significantly different.
    """
    methods = list(per_series_scores)
    if len(methods) < 2:
        raise ValueError(f"need at least 2 methods, got {len(methods)}")
    columns = [as_float_array(per_series_scores[mth], f"scores[{mth}]") for mth in methods]
    n = columns[0].size
    for mth, col in zip(methods, columns):
        if col.size != n:
            raise ValueError(
                f"unequal series counts: {methods[0]!r} has {n}, {mth!r} has {col.size}"
            )
    if n < 2:
        raise ValueError(f"need at least 2 series, got {n}")
    scores = np.column_stack(columns)
    ranks = stats.rankdata(scores, axis=1, method="average")
    mean_ranks = ranks.mean(axis=0)
    k = len(methods)
    if critical_value is None:
        critical_value = nemenyi_critical_value(k, alpha)
    half_width = critical_value * math.sqrt(k * (k + 1) / (12.0 * n))
    return {
        mth: (float(mr), float(mr - half_width), float(mr + half_width))
        for mth, mr in zip(methods, mean_ranks)
    }


@dataclass(frozen=True)
class SeriesScores:
    """The five per-series evaluation measures."""

    mase: float
    msis: float
    coverage: float
    upper_coverage: float
    spread: float

    def to_dict(self) -> dict:
        return {
            "mase": self.mase,
            "msis": self.msis,
            "coverage": self.coverage,
            "upper_coverage": self.upper_coverage,
            "spread": self.spread,
        }


_SCORE_FIELDS = ("mase", "msis", "coverage", "upper_coverage", "spread")


def evaluate_series(
    actuals, point, lower, upper, insample, period: int, alpha: float = 0.05
) -> SeriesScores:
    """All five measures for one series; raises :class:`ZeroDenominatorError`
    for series whose in-sample seasonal-naive error is zero."""
    coverage, upper_coverage, spread = coverage_stats(actuals, lower, upper, insample, period)
    return SeriesScores(
        mase=mase(actuals, point, insample, period),
        msis=msis(actuals, lower, upper, insample, period, alpha),
        coverage=coverage,
        upper_coverage=upper_coverage,
        spread=spread,
    )


@dataclass
class EvaluationReport:
    """Per-series scores for one method plus aggregation helpers.

    ``frequencies`` maps series id to its frequency label; series excluded
    for undefined scaled metrics are listed in ``excluded`` with the reason.
    """

    method: str
    per_series: dict[str, SeriesScores]
    frequencies: dict[str, str]
    excluded: dict[str, str]
    alpha: float = 0.05

    def rows(self):
        """Flat per-series rows (dicts) for tabular serialization."""
        for series_id in self.per_series:
            scores = self.per_series[series_id]
            row = {
                "method": self.method,
                "series_id": series_id,
                "frequency": self.frequencies.get(series_id, ""),
            }
            row.update(scores.to_dict())
            yield row

    def aggregate(self) -> dict:
        """Unweighted per-frequency means plus the count-weighted total."""
        by_frequency: dict[str, list[SeriesScores]] = {}
        for series_id, scores in self.per_series.items():
            label = self.frequencies.get(series_id, "")
            by_frequency.setdefault(label, []).append(scores)

        def summarize(scores: list[SeriesScores]) -> dict:
            out = {"count": len(scores)}
            for field in _SCORE_FIELDS:
                out[field] = float(np.mean([getattr(s, field) for s in scores]))
            return out

        frequencies = {
            label: summarize(scores) for label, scores in sorted(by_frequency.items())
        }
        total: dict = {"count": len(self.per_series)}
        if self.per_series:
            # Weighting per-frequency means by their counts is the grand mean.
            all_scores = list(self.per_series.values())
            for field in _SCORE_FIELDS:
                total[field] = float(np.mean([getattr(s, field) for s in all_scores]))
        return {
            "method": self.method,
            "alpha": self.alpha,
            "frequencies": frequencies,
            "total": total,
            "excluded": dict(sorted(self.excluded.items())),
        }
