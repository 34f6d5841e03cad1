"""Serialization of backtest reports to JSON and flat CSV files.

Floats are written with ``repr`` so that values survive a round trip
exactly. Infinite values are written as the strings ``"inf"``/``"-inf"``
in JSON and as ``inf`` in CSV; undefined values as JSON ``null`` and an
empty CSV cell.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .backtest import BacktestReport, StrategyRows, cumulative_paths
from .metrics import MetricSet, drawdown_series

FORMAT = "netport-backtest/1"
METRIC_FIELDS = ("hi", "turnover", "betc", "avg_drawdown", "expected_value", "omega", "betc_alt")
DIAG_FIELDS = ("objective", "systemic_term", "idiosyncratic_term", "kkt_residual", "ridge_applied", "iterations")
OUTPUT_FILES = ("report.json", "records.csv", "dominance.csv", "pstar.csv", "cumulative.csv")


def _num(v):
    if v is None:
        return None
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    if math.isnan(v):
        return None
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def parse_num(v) -> float:
    """Inverse of the JSON/CSV float encoding."""
    if v is None or v == "":
        return math.nan
    return float(v)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "" if math.isnan(v) else repr(v)


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (str,)) or obj is None:
        return obj
    return _num(obj)


def _metrics(m: MetricSet | None) -> dict | None:
    return None if m is None else m.as_dict()


def _strategy(rows: StrategyRows) -> dict:
    return {
        "windows": [
            {"window": w, "alpha": a, **m.as_dict()}
            for w, a, m in zip(rows.window_indices, rows.alphas, rows.metrics)
        ],
        "aggregate": rows.aggregate,
    }


def report_to_dict(report: BacktestReport) -> dict:
    grid = list(report.spec.alpha_grid)
    out = {
        "format": FORMAT,
        "spec": report.spec.as_dict(),
        "lookahead_warning": report.lookahead_warning,
        "tickers": list(report.tickers),
        "n_windows": report.n_windows,
        "failed_windows": report.failed_windows,
        "failed_solves": report.failed_solves,
        "windows": [vars(w) for w in report.windows],
        "records": [
            {
                "window": r.window_index,
                "alpha": r.alpha,
                "failed": r.failed,
                "weights": r.weights,
                "portfolio_returns": r.portfolio_returns,
                "metrics": _metrics(r.metrics),
                "diagnostics": r.diagnostics,
            }
            for r in report.records
        ],
        "alpha_summary": report.alpha_summary,
        "dominance": {
            "alphas": grid,
            "windows": [w.window_index for w in report.windows],
            "values": report.dominance,
        },
        "pstar": _strategy(report.pstar),
        "benchmarks": {name: _strategy(rows) for name, rows in report.benchmarks.items()},
    }
    return _clean(out)


def report_to_json(report: BacktestReport) -> str:
    return json.dumps(report_to_dict(report), indent=1, allow_nan=False) + "\n"


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow([_cell(v) if not isinstance(v, str) else v for v in row])


def write_outputs(report: BacktestReport, out_dir) -> list[Path]:
    """Write the five report files into ``out_dir`` and return their paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / name for name in OUTPUT_FILES]
    paths[0].write_text(report_to_json(report), encoding="utf-8")

    rows = []
    for r in report.records:
        m = r.metrics.as_dict() if r.metrics else {}
        rows.append(
            [r.window_index, r.alpha, r.failed]
            + [m.get(f) for f in METRIC_FIELDS]
            + [r.diagnostics.get(f) for f in DIAG_FIELDS]
        )
    _write_csv(paths[1], ["window", "alpha", "failed", *METRIC_FIELDS, *DIAG_FIELDS], rows)

    grid = report.spec.alpha_grid
    _write_csv(
        paths[2],
        ["window", *(repr(a) for a in grid)],
        ([w.window_index, *row] for w, row in zip(report.windows, report.dominance)),
    )

    info = {w.window_index: w for w in report.windows}
    ps = report.pstar
    rows = []
    for w, a, m in zip(ps.window_indices, ps.alphas, ps.metrics):
        rows.append(
            [w, info[w].out_start, a]
            + [getattr(m, f) for f in METRIC_FIELDS]
            + [report.record(w, 0.0).metrics.omega, report.record(w, 1.0).metrics.omega]
        )
    _write_csv(paths[3], ["window", "out_start", "alpha", *METRIC_FIELDS, "omega_mv", "omega_cgp"], rows)

    paths_by_name = cumulative_paths(report)
    dates, windows = [], []
    for w in ps.window_indices:
        dates.extend(info[w].out_dates)
        windows.extend([w] * len(info[w].out_dates))
    names = list(paths_by_name)
    dd = {n: drawdown_series(1.0 + np.concatenate([[0.0], paths_by_name[n]]))[1:] for n in names}
    _write_csv(
        paths[4],
        ["date", "window", *names, *(f"{n}_drawdown" for n in names)],
        (
            [d, w, *(paths_by_name[n][i] for n in names), *(dd[n][i] for n in names)]
            for i, (d, w) in enumerate(zip(dates, windows))
        ),
    )
    return paths


def summary_table(report: BacktestReport) -> str:
    """Per-alpha averages of expected value, Omega, turnover and HI, then P*/MV/CGP."""
    cols = ("expected_value", "omega", "turnover", "hi")
    head = f"{'alpha':>8}  " + "  ".join(f"{c:>24}" for c in ("phi", "OR", "turnover", "HI"))
    lines = [f"network: {report.spec.network_kind}", head]
    for row in report.alpha_summary:
        lines.append(f"{row['alpha']!r:>8}  " + "  ".join(f"{row[c]!r:>24}" for c in cols))
    for name, rows in (("P*", report.pstar), ("MV", report.benchmarks["mv"]), ("CGP", report.benchmarks["cgp"])):
        agg = rows.aggregate
        lines.append(f"{name:>8}  " + "  ".join(f"{agg[c]!r:>24}" for c in cols))
    lines.append(
        f"windows: {report.n_windows}, failed windows: {report.failed_windows}, "
        f"failed solves: {report.failed_solves}"
    )
    lines.append(f"note: {report.lookahead_warning}")
    return "\n".join(lines)
