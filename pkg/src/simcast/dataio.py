"""Corpus ingestion, reference-set construction, and persistence.

The corpus format is a long CSV (``series_id,frequency,index,value[,horizon]``)
with contiguous, 1-based, consecutively indexed rows per series. Reference
sets persist to a versioned little-endian binary layout with a config hash in
the header and a trailing CRC-32.
"""

from __future__ import annotations

import csv
import hashlib
import json
import struct
import weakref
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .preprocess import preprocess_series
from .types import (
    Frequency,
    PreprocessConfig,
    ReferenceSeries,
    ReferenceSet,
    TimeSeries,
)
from .validation import as_float_array, check_positive_int, readonly_array

__all__ = [
    "CorpusRecord",
    "CorpusFormatError",
    "ReferenceSetFormatError",
    "ConfigMismatchError",
    "DEFAULT_HORIZONS",
    "read_corpus",
    "write_corpus",
    "apply_history_cut",
    "build_reference_set",
    "calibration_reference_set",
    "save_reference_set",
    "load_reference_set",
    "reference_set_to_json",
]

#: Forecast horizons assumed when the corpus omits the horizon column.
DEFAULT_HORIZONS = {"yearly": 6, "quarterly": 8, "monthly": 18}

_MAGIC = b"SIMCREF\x00"
_FORMAT_VERSION = 1


class CorpusFormatError(ValueError):
    """A malformed corpus file; ``line`` is the offending 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ReferenceSetFormatError(ValueError):
    """A reference-set file that cannot be decoded (bad magic, version, or CRC)."""


class ConfigMismatchError(ValueError):
    """A stored reference set was built with a different preprocessing config."""


@dataclass(frozen=True, eq=False)
class CorpusRecord:
    """One raw corpus series with its frequency label and forecast horizon."""

    series_id: str
    frequency: Frequency
    values: np.ndarray
    horizon: int

    def __post_init__(self):
        object.__setattr__(self, "values", readonly_array(as_float_array(self.values, "values")))
        object.__setattr__(self, "horizon", check_positive_int(self.horizon, "horizon"))

    def to_time_series(self) -> TimeSeries:
        return TimeSeries(self.series_id, self.frequency, self.values, self.horizon)


def _default_horizon(frequency: Frequency, line: int) -> int:
    try:
        return DEFAULT_HORIZONS[frequency.label]
    except KeyError:
        raise CorpusFormatError(
            f"frequency {frequency.label!r} has no default horizon; add a horizon column",
            line,
        ) from None


def read_corpus(path, format: str = "csv") -> list[CorpusRecord]:
    """Parse a corpus file into records, validating structure row by row."""
    if format != "csv":
        raise ValueError(f"unsupported corpus format {format!r}; only 'csv' is implemented")
    path = Path(path)
    records: list[CorpusRecord] = []
    seen: set[str] = set()

    current_id: str | None = None
    current_freq: Frequency | None = None
    current_horizon: int | None = None
    current_values: list[float] = []
    first_line: int = 0

    def flush():
        nonlocal current_id
        if current_id is None:
            return
        horizon = current_horizon
        if horizon is None:
            horizon = _default_horizon(current_freq, first_line)
        records.append(CorpusRecord(current_id, current_freq, current_values, horizon))
        current_id = None

    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusFormatError("empty file: header row required", 1) from None
        header = [h.strip().lower() for h in header]
        required = ["series_id", "frequency", "index", "value"]
        missing = [c for c in required if c not in header]
        if missing:
            raise CorpusFormatError(f"missing required columns: {', '.join(missing)}", 1)
        col = {name: header.index(name) for name in required}
        horizon_col = header.index("horizon") if "horizon" in header else None

        for line, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < len(header):
                raise CorpusFormatError(f"expected {len(header)} columns, got {len(row)}", line)
            series_id = row[col["series_id"]].strip()
            if not series_id:
                raise CorpusFormatError("empty series_id", line)
            try:
                frequency = Frequency.from_label(row[col["frequency"]])
            except ValueError as exc:
                raise CorpusFormatError(str(exc), line) from None
            try:
                index = int(row[col["index"]])
            except ValueError:
                raise CorpusFormatError(f"index {row[col['index']]!r} is not an integer", line) from None
            try:
                value = float(row[col["value"]])
            except ValueError:
                raise CorpusFormatError(f"value {row[col['value']]!r} is not a number", line) from None
            if not np.isfinite(value):
                raise CorpusFormatError(f"value {value!r} is not finite", line)
            horizon = None
            if horizon_col is not None and row[horizon_col].strip():
                try:
                    horizon = int(row[horizon_col])
                except ValueError:
                    raise CorpusFormatError(
                        f"horizon {row[horizon_col]!r} is not an integer", line
                    ) from None
                if horizon < 1:
                    raise CorpusFormatError(f"horizon must be >= 1, got {horizon}", line)

            if series_id != current_id:
                flush()
                if series_id in seen:
                    raise CorpusFormatError(
                        f"rows for series {series_id!r} are not contiguous", line
                    )
                seen.add(series_id)
                current_id = series_id
                current_freq = frequency
                current_horizon = horizon
                current_values = []
                first_line = line
                if index != 1:
                    raise CorpusFormatError(
                        f"series {series_id!r} must start at index 1, got {index}", line
                    )
            else:
                expected = len(current_values) + 1
                if 1 <= index < expected:
                    raise CorpusFormatError(f"duplicate (id, index) = ({series_id!r}, {index})", line)
                if index != expected:
                    raise CorpusFormatError(
                        f"series {series_id!r} index must increase by 1 (expected {expected}, got {index})",
                        line,
                    )
                if frequency != current_freq:
                    raise CorpusFormatError(
                        f"series {series_id!r} changes frequency mid-series", line
                    )
                if horizon is not None and current_horizon is not None and horizon != current_horizon:
                    raise CorpusFormatError(
                        f"series {series_id!r} changes horizon mid-series", line
                    )
                if horizon is not None and current_horizon is None:
                    current_horizon = horizon
            current_values.append(value)
        flush()
    if not records:
        raise CorpusFormatError("corpus contains no series")
    return records


def write_corpus(path, records: Iterable[CorpusRecord]) -> None:
    """Write records in the corpus CSV format (always includes the horizon column)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["series_id", "frequency", "index", "value", "horizon"])
        for record in records:
            for index, value in enumerate(record.values, start=1):
                writer.writerow(
                    [record.series_id, record.frequency.label, index, repr(float(value)), record.horizon]
                )


def apply_history_cut(ts: TimeSeries, max_years: int) -> TimeSeries:
    """Keep only the last ``max_years`` worth of observations (``max_years *
    period`` values); shorter series are returned unchanged."""
    max_years = check_positive_int(max_years, "max_years")
    keep = max_years * ts.frequency.period
    if ts.n <= keep:
        return ts
    return TimeSeries(ts.series_id, ts.frequency, ts.values[-keep:], ts.horizon)


def _build_entry(record, target_n: int, horizon: int, frequency: Frequency, config) -> ReferenceSeries:
    window = np.asarray(record.values, dtype=float)[-(target_n + horizon):]
    history = window[:target_n]
    future = window[target_n:]
    pre = preprocess_series(TimeSeries(record.series_id, frequency, history, horizon), config)
    return ReferenceSeries(record.series_id, history, future, pre)


def build_reference_set(
    corpus: Sequence,
    target_n: int,
    horizon: int,
    frequency: Frequency | int,
    config: PreprocessConfig | None = None,
    threads: int = 1,
) -> ReferenceSet:
    """Truncate, split, and preprocess a corpus into a reference set.

    Series of another frequency or shorter than ``target_n + horizon`` are
    dropped; longer ones keep their last ``target_n + horizon`` values. Each
    surviving history is preprocessed with the (resolved) config. Entry order
    follows corpus order.
    """
    target_n = check_positive_int(target_n, "target_n")
    horizon = check_positive_int(horizon, "horizon")
    if not isinstance(frequency, Frequency):
        frequency = Frequency(int(frequency))
    cfg = (config if config is not None else PreprocessConfig()).resolve(frequency)
    needed = target_n + horizon
    survivors = [
        r for r in corpus if r.frequency == frequency and np.asarray(r.values).size >= needed
    ]
    if not survivors:
        raise ValueError(
            f"empty reference set: no {frequency.label} series with at least {needed} observations"
        )
    workers = max(1, int(threads))
    if workers == 1:
        entries = [_build_entry(r, target_n, horizon, frequency, cfg) for r in survivors]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(
                pool.map(lambda r: _build_entry(r, target_n, horizon, frequency, cfg), survivors)
            )
    return ReferenceSet(target_n, horizon, frequency, tuple(entries), cfg)


_CALIBRATION_CACHE: "weakref.WeakKeyDictionary[ReferenceSet, ReferenceSet]" = (
    weakref.WeakKeyDictionary()
)


def calibration_reference_set(reference_set: ReferenceSet) -> ReferenceSet:
    """The reference set rebuilt for target length ``target_n - horizon``.

    Interval calibration forecasts an inner training slice of the target, so
    the reference windows are re-truncated (keeping the last ``target_n``
    values of each raw window) and re-preprocessed at the shorter length.
    The rebuild is cached per reference set.
    """
    try:
        return _CALIBRATION_CACHE[reference_set]
    except KeyError:
        pass
    inner_n = reference_set.target_n - reference_set.horizon
    if inner_n < 1:
        raise ValueError(
            f"cannot build calibration set: target_n {reference_set.target_n} "
            f"<= horizon {reference_set.horizon}"
        )
    records = [
        CorpusRecord(
            e.series_id,
            reference_set.frequency,
            np.concatenate([e.history, e.future_path]),
            reference_set.horizon,
        )
        for e in reference_set.entries
    ]
    inner = build_reference_set(
        records,
        inner_n,
        reference_set.horizon,
        reference_set.frequency,
        reference_set.config,
    )
    _CALIBRATION_CACHE[reference_set] = inner
    return inner


def _config_json(config: PreprocessConfig) -> bytes:
    return json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":")).encode("utf-8")


def _config_hash(config_json: bytes) -> bytes:
    return hashlib.sha256(config_json).digest()[:8]


def save_reference_set(reference_set: ReferenceSet, path) -> None:
    """Serialize a reference set to the versioned binary format."""
    rs = reference_set
    chunks: list[bytes] = []
    config_json = _config_json(rs.config)
    chunks.append(_MAGIC)
    chunks.append(
        struct.pack(
            "<IIIII", _FORMAT_VERSION, rs.target_n, rs.horizon, rs.frequency.period, rs.m
        )
    )
    chunks.append(struct.pack("<I", len(config_json)))
    chunks.append(config_json)
    chunks.append(_config_hash(config_json))
    for entry in rs.entries:
        id_bytes = entry.series_id.encode("utf-8")
        chunks.append(struct.pack("<I", len(id_bytes)))
        chunks.append(id_bytes)
        pre = entry.preprocessed
        chunks.append(np.asarray(entry.history, dtype="<f8").tobytes())
        chunks.append(np.asarray(entry.future_path, dtype="<f8").tobytes())
        chunks.append(np.asarray(pre.scaled, dtype="<f8").tobytes())
        chunks.append(struct.pack("<ddd", pre.origin, pre.shift, pre.adjustment.lam))
        chunks.append(struct.pack("<B", 1 if pre.adjustment.was_seasonal else 0))
        if pre.adjustment.was_seasonal:
            seasonal = np.asarray(pre.adjustment.seasonal, dtype="<f8")
            chunks.append(struct.pack("<I", seasonal.size))
            chunks.append(seasonal.tobytes())
        else:
            chunks.append(struct.pack("<I", 0))
    payload = b"".join(chunks)
    crc = zlib.crc32(payload) & 0xFFFFFFFF
    Path(path).write_bytes(payload + struct.pack("<I", crc))


class _Cursor:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, count: int) -> bytes:
        if self.pos + count > len(self.data):
            raise ReferenceSetFormatError("reference-set file truncated")
        out = self.data[self.pos : self.pos + count]
        self.pos += count
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def floats(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(count * 8), dtype="<f8").astype(float)


def load_reference_set(path, expected_config: PreprocessConfig | None = None) -> ReferenceSet:
    """Load a reference set, verifying CRC, version, and (optionally) config.

    When ``expected_config`` is given it is resolved against the stored
    frequency and must hash-match the stored config exactly.
    """
    from .preprocess import PreprocessedSeries, SeasonalAdjustment

    data = Path(path).read_bytes()
    if len(data) < len(_MAGIC) + 4:
        raise ReferenceSetFormatError("reference-set file truncated")
    if data[: len(_MAGIC)] != _MAGIC:
        raise ReferenceSetFormatError("not a reference-set file (bad magic)")
    (stored_crc,) = struct.unpack("<I", data[-4:])
    if zlib.crc32(data[:-4]) & 0xFFFFFFFF != stored_crc:
        raise ReferenceSetFormatError("reference-set file corrupted (CRC mismatch)")

    cur = _Cursor(data[:-4])
    cur.take(len(_MAGIC))
    version, target_n, horizon, period, m = cur.unpack("<IIIII")
    if version != _FORMAT_VERSION:
        raise ReferenceSetFormatError(
            f"unsupported reference-set format version {version} (expected {_FORMAT_VERSION})"
        )
    (config_len,) = cur.unpack("<I")
    config_json = cur.take(config_len)
    header_hash = cur.take(8)
    if _config_hash(config_json) != header_hash:
        raise ReferenceSetFormatError("reference-set header corrupted (config hash mismatch)")
    config = PreprocessConfig.from_dict(json.loads(config_json.decode("utf-8")))
    frequency = Frequency(period)
    if expected_config is not None:
        expected_json = _config_json(expected_config.resolve(frequency))
        if expected_json != config_json:
            raise ConfigMismatchError(
                "config mismatch: reference set was built with "
                f"{config_json.decode('utf-8')}, requested "
                f"{expected_json.decode('utf-8')}"
            )

    entries = []
    for _ in range(m):
        (id_len,) = cur.unpack("<I")
        series_id = cur.take(id_len).decode("utf-8")
        history = cur.floats(target_n)
        future = cur.floats(horizon)
        scaled = cur.floats(target_n)
        origin, shift, lam = cur.unpack("<ddd")
        (was_seasonal,) = cur.unpack("<B")
        (seasonal_len,) = cur.unpack("<I")
        seasonal = cur.floats(seasonal_len) if seasonal_len else np.zeros(target_n)
        adjustment = SeasonalAdjustment(lam=lam, seasonal=seasonal, was_seasonal=bool(was_seasonal))
        pre = PreprocessedSeries(
            scaled=scaled, origin=origin, adjustment=adjustment, source_id=series_id, shift=shift
        )
        entries.append(ReferenceSeries(series_id, history, future, pre))
    if cur.pos != len(cur.data):
        raise ReferenceSetFormatError("reference-set file has trailing bytes")
    return ReferenceSet(target_n, horizon, frequency, tuple(entries), config)


def reference_set_to_json(reference_set: ReferenceSet) -> dict:
    """Debug-friendly JSON export of every stored field."""
    rs = reference_set
    return {
        "format_version": _FORMAT_VERSION,
        "target_n": rs.target_n,
        "horizon": rs.horizon,
        "frequency": rs.frequency.label,
        "m": rs.m,
        "config": rs.config.to_dict(),
        "entries": [
            {
                "series_id": e.series_id,
                "history": e.history.tolist(),
                "future_path": e.future_path.tolist(),
                "preprocessed_history": e.preprocessed.scaled.tolist(),
                "origin": e.preprocessed.origin,
                "shift": e.preprocessed.shift,
                "lambda": e.preprocessed.adjustment.lam,
                "was_seasonal": e.preprocessed.adjustment.was_seasonal,
                "seasonal": e.preprocessed.adjustment.seasonal.tolist(),
            }
            for e in rs.entries
        ],
    }
