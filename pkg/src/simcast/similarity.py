"""Distance measures between preprocessed series and k-nearest selection.

L1 and L2 compare series point by point; dynamic time warping allows a
monotone, unconstrained alignment between the two index axes and is computed
with the classic cumulative-cost recurrence (unit step weights, no window).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numba import njit

from .types import Distance, ReferenceSet
from .validation import as_float_array, check_positive_int

__all__ = [
    "distance_l1",
    "distance_l2",
    "distance_dtw",
    "pairwise_distances",
    "nearest_k",
]


def _check_equal_length(a: np.ndarray, b: np.ndarray) -> None:
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")


def distance_l1(a, b) -> float:
    """Sum of absolute deviations between two equal-length series."""
    a = as_float_array(a, "a")
    b = as_float_array(b, "b")
    _check_equal_length(a, b)
    return float(np.sum(np.abs(a - b)))


def distance_l2(a, b) -> float:
    """Euclidean distance between two equal-length series."""
    a = as_float_array(a, "a")
    b = as_float_array(b, "b")
    _check_equal_length(a, b)
    return float(math.sqrt(np.sum((a - b) ** 2)))


@njit(cache=True, nogil=True)
def _dtw_cost(a, b):  # pragma: no cover - exercised through distance_dtw
    n = a.shape[0]
    m = b.shape[0]
    prev = np.empty(m)
    curr = np.empty(m)
    prev[0] = abs(a[0] - b[0])
    for w in range(1, m):
        prev[w] = prev[w - 1] + abs(a[0] - b[w])
    for v in range(1, n):
        curr[0] = prev[0] + abs(a[v] - b[0])
        for w in range(1, m):
            best = prev[w - 1]
            if prev[w] < best:
                best = prev[w]
            if curr[w - 1] < best:
                best = curr[w - 1]
            curr[w] = abs(a[v] - b[w]) + best
        prev, curr = curr, prev
    return prev[m - 1]


@njit(cache=True, nogil=True)
def _dtw_rows(target, matrix, out, start, stop):  # pragma: no cover
    for i in range(start, stop):
        out[i] = _dtw_cost(target, matrix[i])


def distance_dtw(a, b) -> float:
    """Dynamic-time-warping distance (cumulative cost of the best warping path).

    Lengths may differ; the path runs from (1, 1) to (len(a), len(b)).
    """
    a = np.ascontiguousarray(as_float_array(a, "a"))
    b = np.ascontiguousarray(as_float_array(b, "b"))
    return float(_dtw_cost(a, b))


def pairwise_distances(target, matrix, distance: Distance, threads: int = 1) -> np.ndarray:
    """Distances from ``target`` to every row of ``matrix``.

    Row computations are independent; with ``threads > 1`` the DTW rows are
    split across a thread pool (the jitted kernel releases the GIL) and
    written into disjoint slices, so results do not depend on thread count.
    """
    target = np.ascontiguousarray(as_float_array(target, "target"))
    matrix = np.ascontiguousarray(np.asarray(matrix, dtype=float))
    if matrix.ndim != 2:
        raise ValueError(f"matrix must be two-dimensional, got shape {matrix.shape}")
    if matrix.shape[1] != target.size:
        raise ValueError(f"length mismatch: {target.size} vs {matrix.shape[1]}")
    distance = Distance(distance)
    if distance is Distance.L1:
        return np.abs(matrix - target).sum(axis=1)
    if distance is Distance.L2:
        return np.sqrt(((matrix - target) ** 2).sum(axis=1))
    m = matrix.shape[0]
    out = np.empty(m)
    workers = max(1, int(threads))
    if workers == 1 or m < 2 * workers:
        _dtw_rows(target, matrix, out, 0, m)
        return out
    bounds = np.linspace(0, m, workers + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_dtw_rows, target, matrix, out, int(lo), int(hi))
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]
        for future in futures:
            future.result()
    return out


def nearest_k(
    target_pre,
    reference_set: ReferenceSet,
    distance: Distance = Distance.DTW,
    k: int = 500,
    threads: int = 1,
) -> list[tuple[int, float]]:
    """The ``k`` reference series closest to the preprocessed target.

    Returns (entry index, distance) pairs sorted by ascending distance, ties
    broken by lower index. ``k`` larger than the set size is capped with a
    warning.
    """
    k = check_positive_int(k, "k")
    m = reference_set.m
    if k > m:
        warnings.warn(
            f"k = {k} exceeds the reference set size m = {m}; returning all {m} series",
            UserWarning,
            stacklevel=2,
        )
        k = m
    dists = pairwise_distances(
        target_pre, reference_set.preprocessed_matrix, distance, threads=threads
    )
    order = np.argsort(dists, kind="stable")[:k]
    return [(int(i), float(dists[i])) for i in order]
