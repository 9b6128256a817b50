"""Series preprocessing and its inverses.

The pipeline applies, in order: seasonal adjustment (autocorrelation test,
Box-Cox transform, STL decomposition, seasonal removal), Loess smoothing, and
origin scaling. :func:`postprocess_forecast` undoes the scaling and restores
the seasonal pattern on a forecast path.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from statsmodels.tsa.seasonal import STL

from .types import PreprocessConfig, TimeSeries
from .validation import as_float_array, readonly_array

__all__ = [
    "SeasonalAdjustment",
    "PreprocessedSeries",
    "autocorrelations",
    "seasonality_test",
    "guerrero_lambda",
    "box_cox",
    "inverse_box_cox",
    "stl_decompose",
    "seasonal_adjust",
    "loess_smooth",
    "preprocess_series",
    "postprocess_forecast",
]


@dataclass(frozen=True, eq=False)
class SeasonalAdjustment:
    """Inversion state left behind by the seasonal-adjustment step.

    ``seasonal`` is the seasonal component in Box-Cox space, same length as
    the adjusted series. When no adjustment was applied it is all zeros and
    ``lam`` records the identity transform so the inverse path is a no-op.
    """

    lam: float
    seasonal: np.ndarray
    was_seasonal: bool

    def __post_init__(self):
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "seasonal", readonly_array(np.asarray(self.seasonal, dtype=float)))
        object.__setattr__(self, "was_seasonal", bool(self.was_seasonal))

    @classmethod
    def identity(cls, n: int) -> "SeasonalAdjustment":
        return cls(lam=1.0, seasonal=np.zeros(n), was_seasonal=False)


@dataclass(frozen=True, eq=False)
class PreprocessedSeries:
    """Scaled, deseasonalised, smoothed series plus all inversion state.

    ``origin`` is the last value of the smoothed, seasonally adjusted series
    (pre-scaling); by construction ``scaled[-1] == 1`` whenever it is nonzero.
    ``shift`` is nonzero only when the origin was zero and shifted scaling was
    used instead.
    """

    scaled: np.ndarray
    origin: float
    adjustment: SeasonalAdjustment
    source_id: str
    shift: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "scaled", readonly_array(as_float_array(self.scaled, "scaled")))
        object.__setattr__(self, "origin", float(self.origin))
        object.__setattr__(self, "shift", float(self.shift))


def autocorrelations(values, max_lag: int) -> np.ndarray:
    """Autocorrelations for lags 0..max_lag (biased autocovariance estimator).

    Returns NaN everywhere for series with zero variance.
    """
    x = as_float_array(values)
    n = x.size
    x = x - x.mean()
    denom = float(np.dot(x, x))
    out = np.full(max_lag + 1, np.nan)
    if denom <= 0.0:
        return out
    for lag in range(min(max_lag, n - 1) + 1):
        out[lag] = float(np.dot(x[lag:], x[: n - lag])) / denom
    out[n:] = 0.0
    return out


def seasonality_test(values, period: int, z: float = 1.645) -> bool:
    """Decide whether a series is seasonal from the lag-``period`` autocorrelation.

    The lag-s autocorrelation must exceed ``z * sqrt((1 + 2*sum(acf_i^2 for
    i < s)) / n)``. Non-seasonal frequencies (period 1), series shorter than
    three full cycles, and degenerate (constant) series all return False.
    """
    x = as_float_array(values)
    s = int(period)
    if s <= 1:
        return False
    if x.size < 3 * s:
        return False
    r = autocorrelations(x, s)
    if not np.all(np.isfinite(r)):
        return False
    limit = z * math.sqrt((1.0 + 2.0 * float(np.sum(r[1:s] ** 2))) / x.size)
    return bool(abs(r[s]) > limit)


def _guerrero_cv(lam: float, block_means: np.ndarray, block_sds: np.ndarray) -> float:
    """Coefficient of variation of the per-block ``sd / mean^(1-lam)`` ratios."""
    with np.errstate(all="ignore"):
        ratios = block_sds / block_means ** (1.0 - lam)
        mean = ratios.mean()
        if not np.isfinite(mean) or mean == 0.0:
            return math.inf
        cv = ratios.std(ddof=1) / mean
    return float(cv) if np.isfinite(cv) else math.inf


def guerrero_lambda(values, period: int, lambda_range: tuple[float, float] = (0.0, 1.0)) -> float:
    """Select a Box-Cox lambda by minimizing the coefficient of variation of
    per-block ``sd / mean^(1-lambda)`` ratios over consecutive blocks of one
    seasonal period (blocks of 2 for non-seasonal series).

    Falls back to ``lambda = 1`` (with a warning) for series containing
    non-positive values or too short to form two blocks; ties resolve to the
    range point closest to 1.
    """
    x = as_float_array(values)
    lo, hi = (float(v) for v in lambda_range)
    if not 0.0 <= lo <= hi <= 1.0:
        raise ValueError(f"lambda_range must be a closed interval within [0, 1], got {lambda_range}")
    if np.any(x <= 0):
        warnings.warn(
            "series contains non-positive values; falling back to lambda = 1",
            UserWarning,
            stacklevel=2,
        )
        return 1.0
    block = max(2, int(period))
    n_blocks = x.size // block
    if n_blocks < 2:
        warnings.warn(
            f"series too short for lambda selection (need >= {2 * block} values, got {x.size});"
            " falling back to lambda = 1",
            UserWarning,
            stacklevel=2,
        )
        return 1.0
    trimmed = x[x.size - n_blocks * block :].reshape(n_blocks, block)
    means = trimmed.mean(axis=1)
    sds = trimmed.std(axis=1, ddof=1)

    grid = np.linspace(lo, hi, 101)
    scores = np.array([_guerrero_cv(lam, means, sds) for lam in grid])
    finite = np.isfinite(scores)
    if not finite.any() or np.ptp(scores[finite]) <= 1e-12 * max(1.0, abs(scores[finite].max())):
        # Flat or degenerate objective (e.g. constant series): prefer identity.
        return hi
    best = int(np.argmin(scores))
    lam_star, cv_star = float(grid[best]), float(scores[best])
    if 0 < best < grid.size - 1:
        a, b, c = grid[best - 1], grid[best], grid[best + 1]
        if scores[best] < scores[best - 1] and scores[best] < scores[best + 1]:
            try:
                refined = optimize.minimize_scalar(
                    _guerrero_cv, bracket=(a, b, c), args=(means, sds), method="golden"
                )
                if refined.fun < cv_star and lo <= refined.x <= hi:
                    lam_star = float(refined.x)
            except (ValueError, RuntimeError):
                pass
    return lam_star


def box_cox(values, lam: float) -> np.ndarray:
    """Power transform: ``log(x)`` for lambda 0, else ``(x**lambda - 1)/lambda``."""
    x = as_float_array(values)
    lam = float(lam)
    with np.errstate(all="ignore"):
        if lam == 0.0:
            out = np.log(x)
        elif abs(lam) < 0.01:
            # same formula, evaluated without cancellation for tiny lambda
            out = np.expm1(lam * np.log(x)) / lam
        else:
            out = (np.power(x, lam) - 1.0) / lam
    bad = np.flatnonzero(~np.isfinite(out))
    if bad.size:
        i = int(bad[0])
        raise ValueError(
            f"Box-Cox transform undefined at index {i} (value {x[i]}, lambda {lam})"
        )
    return out


def inverse_box_cox(values, lam: float) -> np.ndarray:
    """Exact inverse of :func:`box_cox` on its image."""
    x = as_float_array(values)
    lam = float(lam)
    if lam == 0.0:
        out = np.exp(x)
    else:
        base = lam * x + 1.0
        bad = np.flatnonzero(base <= 0)
        if bad.size:
            i = int(bad[0])
            raise ValueError(
                f"inverse Box-Cox undefined at index {i}: lambda*x + 1 = {base[i]} <= 0"
            )
        if abs(lam) < 0.01:
            out = np.exp(np.log1p(lam * x) / lam)
        else:
            out = np.power(base, 1.0 / lam)
    bad = np.flatnonzero(~np.isfinite(out))
    if bad.size:
        i = int(bad[0])
        raise ValueError(f"inverse Box-Cox overflowed at index {i} (value {x[i]})")
    return out


def _next_odd(value: float) -> int:
    v = int(math.ceil(value))
    return v if v % 2 == 1 else v + 1


def stl_decompose(values, period: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Additive STL decomposition into (trend, seasonal, remainder).

    Cycle-subseries are smoothed with a long span (10 * cycles + 1, degree 0),
    giving a near-periodic seasonal; the trend span is the smallest odd value
    >= 1.5*s / (1 - 1.5/seasonal_span); two inner iterations, no robustness
    iterations. The remainder is defined as the residual, so the three
    components always sum back to the input exactly.
    """
    x = as_float_array(values)
    s = int(period)
    if s < 2:
        raise ValueError(f"period must be >= 2 for STL decomposition, got {period}")
    if x.size < 2 * s + 1:
        raise ValueError(
            f"series too short for STL: need at least {2 * s + 1} observations "
            f"for period {s}, got {x.size}"
        )
    cycles = x.size // s
    seasonal_span = 10 * cycles + 1
    trend_span = max(3, _next_odd(1.5 * s / (1.0 - 1.5 / seasonal_span)))
    result = STL(
        x,
        period=s,
        seasonal=seasonal_span,
        trend=trend_span,
        seasonal_deg=0,
        robust=False,
    ).fit(inner_iter=2, outer_iter=0)
    trend = np.asarray(result.trend, dtype=float)
    seasonal = np.asarray(result.seasonal, dtype=float)
    remainder = x - trend - seasonal
    return trend, seasonal, remainder


def seasonal_adjust(
    values, period: int, config: PreprocessConfig | None = None
) -> tuple[np.ndarray, SeasonalAdjustment]:
    """Remove the seasonal component if the series tests as seasonal.

    Seasonal path: Box-Cox transform (lambda from :func:`guerrero_lambda`),
    STL decomposition, drop the seasonal component, inverse transform.
    Non-seasonal series pass through unchanged with an identity adjustment.
    """
    cfg = config if config is not None else PreprocessConfig()
    x = as_float_array(values)
    if not seasonality_test(x, period, cfg.acf_confidence_z):
        return x.copy(), SeasonalAdjustment.identity(x.size)
    lam = guerrero_lambda(x, period, cfg.lambda_range)
    transformed = box_cox(x, lam)
    trend, seasonal, remainder = stl_decompose(transformed, period)
    adjusted = inverse_box_cox(trend + remainder, lam)
    return adjusted, SeasonalAdjustment(lam=lam, seasonal=seasonal, was_seasonal=True)


def loess_smooth(values, span_observations: int) -> np.ndarray:
    """Locally weighted degree-2 polynomial smoothing with tricube weights.

    For each index the ``span_observations`` nearest indices (a contiguous
    window, clipped at the boundaries) are fit with weights
    ``(1 - (d/d_max)^3)^3`` and the fit is evaluated at that index. The span
    is a count of observations, not a fraction, and is capped at the series
    length.
    """
    x = as_float_array(values)
    n = x.size
    q = int(span_observations)
    if q < 2:
        raise ValueError(f"span_observations must be >= 2, got {span_observations}")
    if n < 2:
        raise ValueError(f"need at least 2 observations to smooth, got {n}")
    q = min(q, n)

    t = np.arange(n)
    starts = np.clip(np.rint(t - (q - 1) / 2.0).astype(int), 0, n - q)
    idx = starts[:, None] + np.arange(q)[None, :]
    dist = np.abs(idx - t[:, None]).astype(float)
    dmax = dist.max(axis=1, keepdims=True)
    u = dist / dmax
    w = (1.0 - u**3) ** 3
    # Centered and scaled design: the fitted value at t is the intercept.
    z = (idx - t[:, None]) / dmax
    design = np.stack([np.ones_like(z), z, z * z], axis=2)
    sw = np.sqrt(w)
    weighted_design = design * sw[:, :, None]
    weighted_y = x[idx] * sw
    beta = np.linalg.pinv(weighted_design) @ weighted_y[:, :, None]
    return beta[:, 0, 0]


def preprocess_series(ts: TimeSeries, config: PreprocessConfig | None = None) -> PreprocessedSeries:
    """Run the preprocessing steps on a series and capture all inversion state.

    Seasonal adjustment and smoothing can each be disabled via the config;
    origin scaling always runs. The Loess span is ``round(span_factor *
    horizon)`` clamped to ``[2, n]``. A zero forecast origin triggers shifted
    scaling (shift by ``1 + |min|``, recorded for inversion) with a warning.
    """
    cfg = (config if config is not None else PreprocessConfig()).resolve(ts.frequency)
    adjusted = np.array(ts.values)
    adjustment = SeasonalAdjustment.identity(ts.n)
    if cfg.seasonal_adjustment:
        adjusted, adjustment = seasonal_adjust(adjusted, ts.frequency.period, cfg)
    if cfg.smoothing and adjusted.size >= 2:
        span = int(round(cfg.span_factor * ts.horizon))
        span = min(max(span, 2), adjusted.size)
        smoothed = loess_smooth(adjusted, span)
    else:
        smoothed = adjusted
    origin = float(smoothed[-1])
    shift = 0.0
    if origin == 0.0:
        shift = 1.0 + abs(float(smoothed.min()))
        warnings.warn(
            f"series {ts.series_id!r}: forecast origin is zero; using shifted scaling",
            UserWarning,
            stacklevel=2,
        )
        smoothed = smoothed + shift
        origin = float(smoothed[-1])
    scaled = smoothed / origin
    return PreprocessedSeries(
        scaled=scaled,
        origin=origin,
        adjustment=adjustment,
        source_id=ts.series_id,
        shift=shift,
    )


def postprocess_forecast(
    path, origin: float, adjustment: SeasonalAdjustment, period: int, shift: float = 0.0
) -> np.ndarray:
    """Map a forecast path from the preprocessed scale back to the raw scale.

    Inverse scaling multiplies by the origin (and removes any recorded
    shift). If the series was seasonally adjusted, the path is Box-Cox
    transformed with the stored lambda, the latest seasonal cycle is repeated
    across the horizon and added back, and the inverse transform is applied.
    """
    out = as_float_array(path, "path") * float(origin) - float(shift)
    if adjustment.was_seasonal:
        transformed = box_cox(out, adjustment.lam)
        cycle = adjustment.seasonal[-int(period):]
        transformed = transformed + np.resize(cycle, out.size)
        out = inverse_box_cox(transformed, adjustment.lam)
    return out
