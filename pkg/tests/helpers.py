"""Synthetic generators and independent oracles shared by the test modules."""

from __future__ import annotations

import numpy as np

from simcast import CorpusRecord, Frequency


def ets_like_series(rng: np.random.Generator, length: int, period: int = 1) -> np.ndarray:
    """One positive series from a mixed ETS-style generator: multiplicative
    level noise, a random (possibly damped) drift, and optional multiplicative
    seasonality."""
    level = rng.uniform(30.0, 120.0)
    drift = rng.normal(0.002, 0.008)
    damp = rng.uniform(0.9, 1.0)
    sigma = rng.uniform(0.01, 0.04)
    steps = np.empty(length)
    b = drift
    for i in range(length):
        steps[i] = b + rng.normal(0.0, sigma)
        b *= damp
    values = level * np.exp(np.cumsum(steps))
    if period > 1:
        amplitude = rng.uniform(0.1, 0.35)
        phase = rng.integers(0, period)
        t = np.arange(length)
        values = values * (1.0 + amplitude * np.sin(2.0 * np.pi * (t + phase) / period))
    return values


def make_corpus(
    seed: int, m: int, length: int, horizon: int, period: int = 1, prefix: str = "ref"
) -> list[CorpusRecord]:
    rng = np.random.default_rng(seed)
    freq = Frequency(period)
    return [
        CorpusRecord(f"{prefix}{i}", freq, ets_like_series(rng, length, period), horizon)
        for i in range(m)
    ]


def dtw_brute_force(a, b) -> float:
    """Minimum cumulative cost over all monotone warping paths, enumerated
    explicitly (no dynamic programming); practical for lengths up to ~7."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n, m = a.size, b.size
    best = [np.inf]

    def walk(v, w, cost):
        cost += abs(a[v] - b[w])
        if cost >= best[0]:
            return
        if v == n - 1 and w == m - 1:
            best[0] = cost
            return
        if v + 1 < n and w + 1 < m:
            walk(v + 1, w + 1, cost)
        if w + 1 < m:
            walk(v, w + 1, cost)
        if v + 1 < n:
            walk(v + 1, w, cost)

    walk(0, 0, 0.0)
    return best[0]


def guerrero_cv_oracle(values, period: int, lam: float) -> float:
    """Direct re-statement of the per-block coefficient-of-variation objective."""
    x = np.asarray(values, dtype=float)
    block = max(2, period)
    n_blocks = x.size // block
    blocks = x[x.size - n_blocks * block :].reshape(n_blocks, block)
    means = blocks.mean(axis=1)
    sds = blocks.std(axis=1, ddof=1)
    ratios = sds / means ** (1.0 - lam)
    return float(ratios.std(ddof=1) / ratios.mean())
