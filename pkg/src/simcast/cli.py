"""Command-line interface: build-ref, forecast, calibrate, and evaluate.

Every run writes a manifest recording the resolved configuration, input
paths, and per-phase timings; outputs are deterministic functions of the
manifest (worker-thread count never changes results).

Exit codes: 0 success, 2 usage error, 3 data error, 4 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dataio import (
    apply_history_cut,
    build_reference_set,
    load_reference_set,
    read_corpus,
    reference_set_to_json,
    save_reference_set,
)
from .forecaster import calibrate_delta, delta_grid, forecast
from .metrics import (
    EvaluationReport,
    SeriesScores,
    ZeroDenominatorError,
    evaluate_series,
    mcb_ranks,
)
from .types import Frequency, ForecastConfig, PreprocessConfig, TimeSeries

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4

_SCORE_COLUMNS = ["mase", "msis", "coverage", "upper_coverage", "spread"]


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _lambda_range(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI floats, got {text!r}") from None
    return lo, hi


def _k_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"k values must be >= 1, got {text!r}")
    return values


def _add_preprocess_flags(parser: argparse.ArgumentParser, inherit: bool = False) -> None:
    # With inherit=True unset flags fall back to the reference set's stored
    # config, keeping target and reference preprocessing consistent.
    acf_default = None if inherit else 1.645
    lambda_default = None if inherit else (0.0, 1.0)
    toggle_default = None if inherit else False
    parser.add_argument("--span-factor", type=float, default=None,
                        help="Loess span multiplier (default: per-frequency)")
    parser.add_argument("--acf-z", type=float, default=acf_default,
                        help="seasonality-test threshold multiplier (default: 1.645)")
    parser.add_argument("--lambda-range", type=_lambda_range, default=lambda_default,
                        metavar="LO,HI", help="Box-Cox lambda search interval (default: 0,1)")
    parser.add_argument("--no-seasonal-adjustment", action="store_true", default=toggle_default,
                        help="disable the seasonal-adjustment step")
    parser.add_argument("--no-smoothing", action="store_true", default=toggle_default,
                        help="disable the Loess smoothing step")


def _add_forecast_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--distance", choices=["l1", "l2", "dtw"], default="dtw",
                        help="distance measure (default: %(default)s)")
    parser.add_argument("--k", type=_positive_int, default=500,
                        help="number of similar series to aggregate (default: %(default)s)")
    parser.add_argument("--aggregator", choices=["median", "mean", "wmean"], default="median",
                        help="path aggregation operator (default: %(default)s)")
    parser.add_argument("--alpha", type=float, default=0.05,
                        help="interval miss rate (default: %(default)s)")
    parser.add_argument("--delta-grid-step", type=float, default=0.01,
                        help="calibration grid resolution (default: %(default)s)")
    parser.add_argument("--cut", type=_positive_int, default=None, metavar="YEARS",
                        help="keep only the last YEARS of each target history")


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--threads", type=_positive_int, default=1,
                        help="worker threads (results never depend on this)")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed recorded in the manifest (the pipeline itself is deterministic)")
    parser.add_argument("--manifest", type=Path, default=None,
                        help="manifest path (default: next to the main output)")


def _preprocess_config(args, base: PreprocessConfig | None = None) -> PreprocessConfig:
    """Config from CLI flags; with a ``base`` (a reference set's snapshot),
    unset flags inherit its values."""
    if base is None:
        return PreprocessConfig(
            acf_confidence_z=args.acf_z,
            span_factor=args.span_factor,
            lambda_range=args.lambda_range,
            seasonal_adjustment=not args.no_seasonal_adjustment,
            smoothing=not args.no_smoothing,
        )
    return PreprocessConfig(
        acf_confidence_z=base.acf_confidence_z if args.acf_z is None else args.acf_z,
        span_factor=base.span_factor if args.span_factor is None else args.span_factor,
        lambda_range=base.lambda_range if args.lambda_range is None else args.lambda_range,
        seasonal_adjustment=(
            base.seasonal_adjustment
            if args.no_seasonal_adjustment is None
            else not args.no_seasonal_adjustment
        ),
        smoothing=base.smoothing if args.no_smoothing is None else not args.no_smoothing,
    )


def _forecast_config(args) -> ForecastConfig:
    return ForecastConfig(
        distance=args.distance,
        k=args.k,
        aggregator=args.aggregator,
        alpha=args.alpha,
        delta_grid_step=args.delta_grid_step,
    )


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _write_manifest(args, command: str, paths: dict, config: dict, timings: dict,
                    default_next_to: Path, extra: dict | None = None) -> None:
    manifest = {
        "schema_version": 1,
        "tool": "simcast",
        "tool_version": __version__,
        "command": command,
        "seed": args.seed,
        "paths": {key: (str(val) if val is not None else None) for key, val in paths.items()},
        "resolved_config": config,
        "timings_s": {phase: round(seconds, 6) for phase, seconds in timings.items()},
    }
    if extra:
        manifest.update(extra)
    target = args.manifest if args.manifest is not None else default_next_to.with_suffix(
        default_next_to.suffix + ".manifest.json"
    )
    _write_json(Path(target), manifest)


class _Timer:
    def __init__(self):
        self.timings: dict[str, float] = {}

    def phase(self, name: str):
        timer = self

        class _Phase:
            def __enter__(self):
                self.start = time.perf_counter()

            def __exit__(self, *exc):
                timer.timings[name] = timer.timings.get(name, 0.0) + (
                    time.perf_counter() - self.start
                )
                return False

        return _Phase()


def _load_targets(path, cut_years=None) -> list[TimeSeries]:
    records = read_corpus(path)
    targets = [r.to_time_series() for r in records]
    if cut_years is not None:
        targets = [apply_history_cut(ts, cut_years) for ts in targets]
    return targets


def _series_payload(ts: TimeSeries, result) -> dict:
    return {
        "series_id": ts.series_id,
        "frequency": ts.frequency.label,
        "n": ts.n,
        "horizon": ts.horizon,
        "point": [float(v) for v in result.point],
        "lower": [float(v) for v in result.lower],
        "upper": [float(v) for v in result.upper],
        "delta_star": float(result.delta_star),
        "calibration_skipped": bool(result.calibration_skipped),
        "neighbor_ids": list(result.neighbor_ids),
        "neighbor_distances": [float(v) for v in result.neighbor_distances],
    }


def cmd_build_ref(args) -> int:
    timer = _Timer()
    with timer.phase("read_corpus"):
        corpus = read_corpus(args.corpus)
    frequency = Frequency.from_label(args.freq)
    config = _preprocess_config(args)
    with timer.phase("build"):
        reference_set = build_reference_set(
            corpus, args.n, getattr(args, "h"), frequency, config, threads=args.threads
        )
    with timer.phase("write"):
        save_reference_set(reference_set, args.out)
        if args.debug_json is not None:
            _write_json(Path(args.debug_json), reference_set_to_json(reference_set))
    dropped = len(corpus) - reference_set.m
    _write_manifest(
        args,
        "build-ref",
        {"corpus": args.corpus, "out": args.out, "debug_json": args.debug_json},
        {"preprocess": reference_set.config.to_dict(),
         "n": reference_set.target_n, "h": reference_set.horizon,
         "frequency": frequency.label},
        timer.timings,
        Path(args.out),
        extra={"reference": {"m": reference_set.m, "dropped": dropped}},
    )
    print(f"built reference set: m={reference_set.m} dropped={dropped} -> {args.out}")
    return EXIT_OK


def cmd_forecast(args) -> int:
    timer = _Timer()
    with timer.phase("load"):
        reference_set = load_reference_set(args.ref)
        targets = _load_targets(args.targets, args.cut)
        actuals = _read_actuals(args.actuals, targets) if args.actuals else {}
    pcfg = _preprocess_config(args, base=reference_set.config).resolve(reference_set.frequency)
    fcfg = _forecast_config(args)
    results = []
    with timer.phase("forecast"):
        for ts in targets:
            results.append(forecast(ts, reference_set, pcfg, fcfg, threads=args.threads))
    with timer.phase("write"):
        payload = {
            "schema_version": 1,
            "method": args.method_name,
            "config": {"preprocess": pcfg.to_dict(), "forecast": fcfg.to_dict(),
                       "cut_years": args.cut},
            "reference": {"n": reference_set.target_n, "h": reference_set.horizon,
                          "frequency": reference_set.frequency.label, "m": reference_set.m},
            "series": [_series_payload(ts, res) for ts, res in zip(targets, results)],
        }
        _write_json(Path(args.out), payload)
        if args.plot_csv is not None:
            _write_plot_csv(Path(args.plot_csv), targets, results, actuals)
    _write_manifest(
        args,
        "forecast",
        {"targets": args.targets, "reference": args.ref, "out": args.out,
         "plot_csv": args.plot_csv, "actuals": args.actuals},
        {"preprocess": pcfg.to_dict(), "forecast": fcfg.to_dict(), "cut_years": args.cut},
        timer.timings,
        Path(args.out),
        extra={"reference": payload["reference"]},
    )
    print(f"forecast {len(targets)} series -> {args.out}")
    return EXIT_OK


def _split_actuals(record, n: int, horizon: int) -> tuple[np.ndarray, np.ndarray]:
    """(insample, holdout) from an actuals record holding history plus holdout.

    Longer records are suffix-truncated, which matches --cut semantics (a cut
    keeps the last n history values).
    """
    needed = n + horizon
    if record.values.size < needed:
        raise ValueError(
            f"series {record.series_id!r}: actuals file must hold history plus holdout "
            f"(at least {needed} values), got {record.values.size}"
        )
    window = np.asarray(record.values[-needed:])
    return window[:n], window[n:]


def _read_actuals(path, targets) -> dict[str, np.ndarray]:
    """Holdout actuals per target id from a corpus of history-plus-holdout series."""
    records = {r.series_id: r for r in read_corpus(path)}
    out = {}
    for ts in targets:
        record = records.get(ts.series_id)
        if record is None:
            raise ValueError(f"id mismatch: series {ts.series_id!r} missing from actuals file")
        _, holdout = _split_actuals(record, ts.n, ts.horizon)
        out[ts.series_id] = holdout
    return out


def _write_plot_csv(path: Path, targets, results, actuals) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["series_id", "step", "actual", "point", "lower", "upper"])
        for ts, res in zip(targets, results):
            holdout = actuals.get(ts.series_id)
            for step in range(ts.horizon):
                actual = repr(float(holdout[step])) if holdout is not None else ""
                writer.writerow(
                    [ts.series_id, step + 1, actual, repr(float(res.point[step])),
                     repr(float(res.lower[step])), repr(float(res.upper[step]))]
                )


def cmd_calibrate(args) -> int:
    timer = _Timer()
    with timer.phase("load"):
        reference_set = load_reference_set(args.ref)
        targets = _load_targets(args.targets, args.cut)
    pcfg = _preprocess_config(args, base=reference_set.config).resolve(reference_set.frequency)
    fcfg = _forecast_config(args)
    rows = []
    curves = []
    grid = delta_grid(fcfg.delta_grid_step)
    with timer.phase("calibrate"):
        for ts in targets:
            cal = calibrate_delta(ts, reference_set, pcfg, fcfg, threads=args.threads)
            rows.append(
                {"series_id": ts.series_id, "delta_star": cal.delta_star, "skipped": cal.skipped}
            )
            if args.curve_csv is not None and cal.msis_by_delta is not None:
                curves.extend(
                    (ts.series_id, float(d), float(score))
                    for d, score in zip(grid, cal.msis_by_delta)
                )
    with timer.phase("write"):
        payload = {
            "schema_version": 1,
            "config": {"preprocess": pcfg.to_dict(), "forecast": fcfg.to_dict()},
            "series": rows,
        }
        _write_json(Path(args.out), payload)
        if args.curve_csv is not None:
            path = Path(args.curve_csv)
            path.parent.mkdir(parents=True, exist_ok=True)
            with path.open("w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle)
                writer.writerow(["series_id", "delta", "msis"])
                for series_id, d, score in curves:
                    writer.writerow([series_id, d, repr(score)])
    _write_manifest(
        args,
        "calibrate",
        {"targets": args.targets, "reference": args.ref, "out": args.out,
         "curve_csv": args.curve_csv},
        {"preprocess": pcfg.to_dict(), "forecast": fcfg.to_dict(), "cut_years": args.cut},
        timer.timings,
        Path(args.out),
    )
    print(f"calibrated {len(targets)} series -> {args.out}")
    return EXIT_OK


def _evaluate_forecast_file(path: Path, method: str, actual_records) -> EvaluationReport:
    with Path(path).open(encoding="utf-8") as handle:
        payload = json.load(handle)
    alpha = payload.get("config", {}).get("forecast", {}).get("alpha", 0.05)
    per_series: dict[str, SeriesScores] = {}
    frequencies: dict[str, str] = {}
    excluded: dict[str, str] = {}
    for entry in payload["series"]:
        series_id = entry["series_id"]
        record = actual_records.get(series_id)
        if record is None:
            raise ValueError(f"id mismatch: series {series_id!r} missing from actuals file")
        insample, holdout = _split_actuals(record, entry["n"], entry["horizon"])
        period = Frequency.from_label(entry["frequency"]).period
        frequencies[series_id] = entry["frequency"]
        try:
            per_series[series_id] = evaluate_series(
                holdout, entry["point"], entry["lower"], entry["upper"], insample, period, alpha
            )
        except ZeroDenominatorError as exc:
            excluded[series_id] = str(exc)
    return EvaluationReport(method, per_series, frequencies, excluded, alpha)


def _write_reports(out_dir: Path, reports: list[EvaluationReport], rank_metric: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "per_series.csv").open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["method", "series_id", "frequency", *_SCORE_COLUMNS])
        for report in reports:
            for row in report.rows():
                writer.writerow(
                    [row["method"], row["series_id"], row["frequency"]]
                    + [repr(row[c]) for c in _SCORE_COLUMNS]
                )
    _write_json(out_dir / "aggregate.json",
                {"schema_version": 1, "methods": [r.aggregate() for r in reports]})
    if len(reports) >= 2:
        shared = set(reports[0].per_series)
        for report in reports[1:]:
            shared &= set(report.per_series)
        shared_ids = sorted(shared)
        if len(shared_ids) >= 2:
            scores = {
                r.method: [getattr(r.per_series[sid], rank_metric) for sid in shared_ids]
                for r in reports
            }
            ranks = mcb_ranks(scores)
            with (out_dir / "mean_ranks.csv").open("w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle)
                writer.writerow(["method", "mean_rank", "ci_lower", "ci_upper"])
                for method, (mean_rank, lo, hi) in ranks.items():
                    writer.writerow([method, repr(mean_rank), repr(lo), repr(hi)])


def _sweep_rows(args, timer) -> tuple[list[dict], PreprocessConfig]:
    reference_set = load_reference_set(args.ref)
    records = read_corpus(args.targets)
    pcfg = _preprocess_config(args, base=reference_set.config).resolve(reference_set.frequency)
    rows = []
    splits = []
    for record in records:
        h = reference_set.horizon
        if record.values.size <= h:
            raise ValueError(
                f"series {record.series_id!r}: need history plus a {h}-step holdout, "
                f"got {record.values.size} values"
            )
        history = TimeSeries(record.series_id, record.frequency, record.values[:-h], h)
        if args.cut is not None:
            history = apply_history_cut(history, args.cut)
        if history.n != reference_set.target_n:
            raise ValueError(
                f"series {record.series_id!r}: history length {history.n} does not match "
                f"reference set length {reference_set.target_n}"
            )
        splits.append((history, record.values[-h:]))
    for k in args.sweep_k:
        fcfg = ForecastConfig(
            distance=args.distance, k=k, aggregator=args.aggregator,
            alpha=args.alpha, delta_grid_step=args.delta_grid_step,
        )
        per_series: dict[str, SeriesScores] = {}
        excluded = 0
        with timer.phase(f"sweep_k={k}"):
            for history, holdout in splits:
                result = forecast(history, reference_set, pcfg, fcfg, threads=args.threads)
                try:
                    per_series[history.series_id] = evaluate_series(
                        holdout, result.point, result.lower, result.upper,
                        history.values, history.frequency.period, fcfg.alpha,
                    )
                except ZeroDenominatorError:
                    excluded += 1
        row = {"k": k, "count": len(per_series), "excluded": excluded}
        for column in _SCORE_COLUMNS:
            values = [getattr(s, column) for s in per_series.values()]
            row[column] = float(np.mean(values)) if values else float("nan")
        rows.append(row)
    return rows, pcfg


def cmd_evaluate(args) -> int:
    timer = _Timer()
    out_dir = Path(args.out_dir)
    if args.sweep_k is not None:
        if not args.targets or not args.ref:
            raise ValueError("--sweep-k requires --targets and --ref")
        rows, sweep_pcfg = _sweep_rows(args, timer)
        with timer.phase("write"):
            out_dir.mkdir(parents=True, exist_ok=True)
            with (out_dir / "sweep.csv").open("w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle)
                columns = ["k", "count", "excluded", *_SCORE_COLUMNS]
                writer.writerow(columns)
                for row in rows:
                    writer.writerow(
                        [row["k"], row["count"], row["excluded"]]
                        + [repr(row[c]) for c in _SCORE_COLUMNS]
                    )
        _write_manifest(
            args,
            "evaluate",
            {"targets": args.targets, "reference": args.ref, "out_dir": args.out_dir},
            {"preprocess": sweep_pcfg.to_dict(),
             "sweep_k": args.sweep_k, "distance": args.distance,
             "aggregator": args.aggregator, "alpha": args.alpha,
             "delta_grid_step": args.delta_grid_step, "cut_years": args.cut},
            timer.timings,
            out_dir / "sweep.csv",
        )
        print(f"swept k over {args.sweep_k} -> {out_dir / 'sweep.csv'}")
        return EXIT_OK

    if not args.forecasts:
        raise ValueError("either --forecasts or --sweep-k is required")
    with timer.phase("load"):
        actual_records = {r.series_id: r for r in read_corpus(args.actuals)}
    methods = args.method_names or []
    if methods and len(methods) != len(args.forecasts):
        raise ValueError(
            f"--method-names needs one name per forecast file "
            f"({len(args.forecasts)} files, {len(methods)} names)"
        )
    reports = []
    with timer.phase("evaluate"):
        for i, path in enumerate(args.forecasts):
            method = methods[i] if methods else Path(path).stem
            reports.append(_evaluate_forecast_file(Path(path), method, actual_records))
    with timer.phase("write"):
        _write_reports(out_dir, reports, args.rank_metric)
    _write_manifest(
        args,
        "evaluate",
        {"forecasts": [str(p) for p in args.forecasts], "actuals": args.actuals,
         "out_dir": args.out_dir},
        {"rank_metric": args.rank_metric},
        timer.timings,
        out_dir / "aggregate.json",
    )
    total = sum(len(r.per_series) for r in reports)
    print(f"evaluated {total} series across {len(reports)} method(s) -> {out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simcast",
        description="Forecast a series from the observed futures of similar reference series.",
    )
    parser.add_argument("--version", action="version", version=f"simcast {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build-ref", help="preprocess a corpus into a reference-set file")
    p_build.add_argument("--corpus", default=os.environ.get("SIMCAST_CORPUS"), required="SIMCAST_CORPUS" not in os.environ,
                         help="corpus CSV (env: SIMCAST_CORPUS)")
    p_build.add_argument("--n", type=_positive_int, required=True,
                         help="target history length the set is built for")
    p_build.add_argument("--h", type=_positive_int, required=True, help="forecast horizon")
    p_build.add_argument("--freq", required=True,
                         help="frequency label: yearly, quarterly, monthly, or other:<period>")
    p_build.add_argument("--out", required=True, help="output reference-set file")
    p_build.add_argument("--debug-json", type=Path, default=None,
                         help="also export the set as JSON for inspection")
    _add_preprocess_flags(p_build)
    _add_common_flags(p_build)
    p_build.set_defaults(func=cmd_build_ref)

    p_fc = sub.add_parser("forecast", help="forecast target series against a reference set")
    p_fc.add_argument("--targets", default=os.environ.get("SIMCAST_TARGETS"), required="SIMCAST_TARGETS" not in os.environ,
                      help="corpus CSV of target histories (env: SIMCAST_TARGETS)")
    p_fc.add_argument("--ref", default=os.environ.get("SIMCAST_REF"), required="SIMCAST_REF" not in os.environ,
                      help="reference-set file (env: SIMCAST_REF)")
    p_fc.add_argument("--out", required=True, help="output forecast JSON")
    p_fc.add_argument("--plot-csv", type=Path, default=None,
                      help="also emit plot-ready CSV (step, actual, point, lower, upper)")
    p_fc.add_argument("--actuals", default=None,
                      help="corpus CSV with history plus holdout, used to fill the plot CSV")
    p_fc.add_argument("--method-name", default="similarity",
                      help="method label recorded in the output (default: %(default)s)")
    _add_forecast_flags(p_fc)
    _add_preprocess_flags(p_fc, inherit=True)
    _add_common_flags(p_fc)
    p_fc.set_defaults(func=cmd_forecast)

    p_cal = sub.add_parser("calibrate", help="grid-search the interval widening factor per series")
    p_cal.add_argument("--targets", default=os.environ.get("SIMCAST_TARGETS"), required="SIMCAST_TARGETS" not in os.environ)
    p_cal.add_argument("--ref", default=os.environ.get("SIMCAST_REF"), required="SIMCAST_REF" not in os.environ)
    p_cal.add_argument("--out", required=True, help="output calibration JSON")
    p_cal.add_argument("--curve-csv", type=Path, default=None,
                       help="also emit the per-series MSIS-vs-delta curves")
    _add_forecast_flags(p_cal)
    _add_preprocess_flags(p_cal, inherit=True)
    _add_common_flags(p_cal)
    p_cal.set_defaults(func=cmd_calibrate)

    p_ev = sub.add_parser("evaluate", help="score forecast files, or sweep k against a holdout")
    p_ev.add_argument("--forecasts", nargs="+", default=None,
                      help="forecast JSON files (one per method)")
    p_ev.add_argument("--actuals", default=os.environ.get("SIMCAST_ACTUALS"),
                      help="corpus CSV with history plus holdout per series (env: SIMCAST_ACTUALS)")
    p_ev.add_argument("--out-dir", default=os.environ.get("SIMCAST_OUT_DIR", "evaluation"),
                      help="output directory (env: SIMCAST_OUT_DIR, default: %(default)s)")
    p_ev.add_argument("--method-names", nargs="+", default=None,
                      help="method labels (default: forecast file stems)")
    p_ev.add_argument("--rank-metric", choices=_SCORE_COLUMNS, default="mase",
                      help="per-series score used for mean ranks (default: %(default)s)")
    p_ev.add_argument("--sweep-k", type=_k_list, default=None, metavar="K1,K2,...",
                      help="run the forecaster for each k and emit one aggregate row per k")
    p_ev.add_argument("--targets", default=os.environ.get("SIMCAST_TARGETS"),
                      help="(sweep mode) corpus CSV with history plus holdout")
    p_ev.add_argument("--ref", default=os.environ.get("SIMCAST_REF"),
                      help="(sweep mode) reference-set file")
    _add_forecast_flags(p_ev)
    _add_preprocess_flags(p_ev, inherit=True)
    _add_common_flags(p_ev)
    p_ev.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # internal invariant violation
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
