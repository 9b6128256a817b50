"""Input validation helpers shared across the package."""

from __future__ import annotations

import numpy as np


def as_float_array(values, name: str = "values", allow_empty: bool = False) -> np.ndarray:
    """Coerce ``values`` to a 1-D float64 array, rejecting NaN and infinities.

    Raises
    ------
    ValueError
        If the input is empty (unless ``allow_empty``), not one-dimensional,
        or contains a non-finite value (the offending index is reported).
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        if allow_empty:
            return arr
        raise ValueError(f"empty series: {name} must contain at least one value")
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        i = int(bad[0])
        raise ValueError(f"{name} contains a non-finite value at index {i}")
    return arr


def as_float_matrix(values, name: str = "paths") -> np.ndarray:
    """Coerce ``values`` to a 2-D float64 array of equal-length rows."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        row, col = np.argwhere(~np.isfinite(arr))[0]
        raise ValueError(f"{name} contains a non-finite value at ({row}, {col})")
    return arr


def check_positive_int(value, name: str) -> int:
    """Validate that ``value`` is an integer >= 1 and return it as ``int``."""
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if value < 1:
        raise ValueError(f"{name} must be >= 1, got {value}")
    return int(value)


def check_unit_interval(value, name: str, open_ends: bool = True) -> float:
    """Validate a float in (0, 1) (or [0, 1] when ``open_ends`` is false)."""
    v = float(value)
    if open_ends and not 0.0 < v < 1.0:
        raise ValueError(f"{name} must lie strictly between 0 and 1, got {value}")
    if not open_ends and not 0.0 <= v <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return v


def readonly_array(values) -> np.ndarray:
    """Return a read-only float64 copy of ``values`` (any shape)."""
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr
