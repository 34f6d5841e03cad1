"""Rolling-window backtest of the network-based allocation.

For each window the in-sample block yields a dependency network, a risk
model and one optimal portfolio per alpha on the grid. Each portfolio is
bought and held through the out-of-sample block. The report collects
every (window, alpha) record, per-alpha averages, the Omega dominance
ratio against the clustering-only portfolio, and the P* strategy that
picks the best-Omega alpha in each window.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BacktestError, NetportError
from .market_data import ReturnsMatrix, WindowPair, make_windows
from .metrics import MetricSet, average_drawdown, equal_weights, turnover, value_path, window_metrics
from .networks import DEFAULT_TAIL_Q, KINDS, dependency_matrix
from .optimizer import AllocationResult, solve_sweep
from .systemic import build_risk_model

logger = logging.getLogger(__name__)

DEFAULT_ALPHA_GRID: tuple[float, ...] = tuple(i / 20 for i in range(21))
MAX_FAILURE_RATE = 0.2
SERIAL_ENV = "NETPORT_SERIAL"

LOOKAHEAD_WARNING = (
    "P* picks, in every window, the alpha with the best out-of-sample Omega ratio. "
    "It uses information that is not available at rebalancing time and is not an "
    "implementable strategy."
)


@dataclass(frozen=True)
class StrategySpec:
    network_kind: str = "pearson"
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID
    in_months: int = 12
    out_months: int = 1
    step_months: int = 1
    tail_q: float = DEFAULT_TAIL_Q
    tol: float = 1e-8
    max_iter: int = 10_000
    omega_threshold: float = 0.0

    def __post_init__(self):
        if self.network_kind not in KINDS:
            raise ValueError(f"network_kind must be one of {KINDS}, got {self.network_kind!r}")
        grid = tuple(float(a) for a in self.alpha_grid)
        object.__setattr__(self, "alpha_grid", grid)
        if list(grid) != sorted(set(grid)):
            raise ValueError("alpha_grid must be strictly increasing")
        if grid[0] != 0.0 or grid[-1] != 1.0:
            raise ValueError("alpha_grid must start at 0 and end at 1")
        if min(self.in_months, self.out_months, self.step_months) < 1:
            raise ValueError("window lengths must be >= 1 month")
        if not 0 < self.tail_q <= 0.5:
            raise ValueError("tail_q must lie in (0, 0.5]")

    def as_dict(self) -> dict:
        return {
            "network_kind": self.network_kind,
            "alpha_grid": list(self.alpha_grid),
            "in_months": self.in_months,
            "out_months": self.out_months,
            "step_months": self.step_months,
            "tail_q": self.tail_q,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "omega_threshold": self.omega_threshold,
        }


@dataclass
class WindowRecord:
    window_index: int
    alpha: float
    weights: np.ndarray | None
    portfolio_returns: np.ndarray | None
    metrics: MetricSet | None
    diagnostics: dict = field(default_factory=dict)
    failed: bool = False


@dataclass
class WindowInfo:
    window_index: int
    in_start: str
    in_end: str
    out_start: str
    out_end: str
    out_dates: list[str]
    r_p: float | None
    failed: bool
    error: str | None
    mean_clustering: float | None = None
    covariance_ridge: float | None = None


@dataclass
class StrategyRows:
    """Per-window weights and metrics of a strategy that may switch alpha."""

    alphas: list[float]
    window_indices: list[int]
    metrics: list[MetricSet]
    aggregate: dict


@dataclass
class BacktestReport:
    spec: StrategySpec
    tickers: tuple[str, ...]
    windows: list[WindowInfo]
    records: list[WindowRecord]
    alpha_summary: list[dict] = field(default_factory=list)
    dominance: np.ndarray | None = None
    pstar: StrategyRows | None = None
    benchmarks: dict = field(default_factory=dict)
    failed_solves: int = 0
    lookahead_warning: str = LOOKAHEAD_WARNING

    @property
    def n_windows(self) -> int:
        return len(self.windows)

    @property
    def failed_windows(self) -> int:
        return sum(w.failed for w in self.windows)

    def record(self, window_index: int, alpha: float) -> WindowRecord:
        k = self.spec.alpha_grid.index(alpha)
        return self.records[(window_index - 1) * len(self.spec.alpha_grid) + k]

    def ok_windows(self) -> list[int]:
        return [w.window_index for w in self.windows if not w.failed]


@dataclass
class _WindowSolution:
    window_index: int
    r_p: float | None
    results: list[AllocationResult] | None
    error: str | None
    mean_clustering: float | None = None
    covariance_ridge: float | None = None


def target_return(mu: np.ndarray) -> float:
    """Median of per-asset mean returns; even counts average the middle pair."""
    return float(np.median(mu))


def _solve_window(pair: WindowPair, spec: StrategySpec) -> _WindowSolution:
    ins = pair.in_sample
    mu = ins.values.mean(axis=0)
    r_p = target_return(mu)
    try:
        dep = dependency_matrix(ins, spec.network_kind, spec.tail_q)
        risk = build_risk_model(ins, dep)
        results = solve_sweep(risk, mu, r_p, spec.alpha_grid, tol=spec.tol, max_iter=spec.max_iter)
    except NetportError as exc:
        return _WindowSolution(pair.window_index, r_p, None, f"{type(exc).__name__}: {exc}")
    return _WindowSolution(
        pair.window_index,
        r_p,
        results,
        None,
        float(risk.clustering.coefficients.mean()),
        float(risk.diagnostics["covariance_ridge"]),
    )


def _solve_window_args(args):
    return _solve_window(*args)


def _iso(d) -> str:
    return str(np.datetime_as_string(d, unit="D"))


def serial_forced() -> bool:
    return os.environ.get(SERIAL_ENV, "") not in ("", "0")


def run_backtest(returns: ReturnsMatrix, spec: StrategySpec, jobs: int | None = None) -> BacktestReport:
    """Run the rolling-window procedure for one network kind.

    Windows are solved independently (in worker processes when ``jobs`` >
    1) and merged in window order, so the report does not depend on the
    pool size.
    """
    if returns.n_assets < 3:
        raise BacktestError(f"backtest needs at least 3 assets, got {returns.n_assets}")
    pairs = make_windows(returns, spec.in_months, spec.out_months, spec.step_months)
    if jobs is None:
        jobs = os.cpu_count() or 1
    if serial_forced():
        jobs = 1

    if jobs > 1 and len(pairs) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(pairs))) as pool:
            solutions = list(pool.map(_solve_window_args, [(p, spec) for p in pairs]))
    else:
        solutions = [_solve_window(p, spec) for p in pairs]

    grid = spec.alpha_grid
    windows: list[WindowInfo] = []
    records: list[WindowRecord] = []
    failed_solves = 0
    previous = {a: equal_weights(returns.n_assets) for a in grid}

    for pair, sol in zip(pairs, solutions):
        error = sol.error
        if error is None:
            bad = [a for a, res in zip(grid, sol.results) if not res.converged]
            failed_solves += len(bad)
            if bad:
                error = f"solver did not certify alpha in {bad}"
        else:
            failed_solves += len(grid)
        oos = pair.out_of_sample
        windows.append(
            WindowInfo(
                window_index=pair.window_index,
                in_start=_iso(pair.in_sample.dates[0]),
                in_end=_iso(pair.in_sample.dates[-1]),
                out_start=_iso(oos.dates[0]),
                out_end=_iso(oos.dates[-1]),
                out_dates=[_iso(d) for d in oos.dates],
                r_p=sol.r_p,
                failed=error is not None,
                error=error,
                mean_clustering=sol.mean_clustering,
                covariance_ridge=sol.covariance_ridge,
            )
        )
        if error is not None:
            logger.warning("window %d excluded: %s", pair.window_index, error)
            diag = {"error": error}
            if sol.results is not None:
                records.extend(
                    WindowRecord(pair.window_index, a, None, None, None, {**res.diagnostics(), **diag}, True)
                    for a, res in zip(grid, sol.results)
                )
            else:
                records.extend(WindowRecord(pair.window_index, a, None, None, None, dict(diag), True) for a in grid)
            continue
        for a, res in zip(grid, sol.results):
            metrics, p = window_metrics(oos.values, res.weights, previous[a], spec.omega_threshold)
            records.append(WindowRecord(pair.window_index, a, res.weights, p, metrics, res.diagnostics()))
            previous[a] = res.weights

    total = len(pairs) * len(grid)
    if failed_solves > MAX_FAILURE_RATE * total:
        raise BacktestError(f"{failed_solves} of {total} solves failed (limit {MAX_FAILURE_RATE:.0%})")

    report = BacktestReport(spec, returns.tickers, windows, records, failed_solves=failed_solves)
    report.alpha_summary = alpha_averages(report)
    report.dominance = dominance_ratio(report)
    report.pstar = select_p_star(report)
    report.benchmarks = {
        "mv": fixed_alpha_strategy(report, 0.0),
        "cgp": fixed_alpha_strategy(report, 1.0),
    }
    return report


def _mean(values) -> float:
    values = list(values)
    return float(np.mean(values)) if values else math.nan


def summarize(metrics: list[MetricSet]) -> dict:
    """Window averages of each measure; BETC is also given in basis points."""
    out = {
        "hi": _mean(m.hi for m in metrics),
        "turnover": _mean(m.turnover for m in metrics),
        "betc": _mean(m.betc for m in metrics),
        "avg_drawdown": _mean(m.avg_drawdown for m in metrics),
        "expected_value": _mean(m.expected_value for m in metrics),
        "omega": _mean(m.omega for m in metrics),
        "omega_infinite_windows": sum(m.omega_infinite for m in metrics),
        "betc_alt": _mean(m.betc_alt for m in metrics),
    }
    out["betc_bps"] = out["betc"] * 1e4
    return out


def alpha_averages(report: BacktestReport) -> list[dict]:
    rows = []
    for a in report.spec.alpha_grid:
        ms = [report.record(w, a).metrics for w in report.ok_windows()]
        rows.append({"alpha": a, "windows": len(ms), **summarize(ms)})
    return rows


def _path_drawdown(records: list[WindowRecord]) -> float:
    if not records:
        return math.nan
    return average_drawdown(np.concatenate([r.portfolio_returns for r in records]))


def dominance_ratio(report: BacktestReport) -> np.ndarray:
    """``(OR_alpha - OR_cgp) / OR_cgp`` per window and alpha; NaN where undefined."""
    grid = report.spec.alpha_grid
    out = np.full((report.n_windows, len(grid)), math.nan)
    for row, info in enumerate(report.windows):
        if info.failed:
            continue
        base = report.record(info.window_index, 1.0).metrics.omega
        if base == 0 or not math.isfinite(base):
            continue
        for k, a in enumerate(grid):
            om = report.record(info.window_index, a).metrics.omega
            if math.isfinite(om):
                out[row, k] = (om - base) / base
    return out


def _strategy(report: BacktestReport, chosen: list[tuple[int, float]]) -> StrategyRows:
    """Metrics for a strategy holding the recorded portfolio of ``alpha`` in each window.

    Turnover is measured against the strategy's own previous holdings
    (equal weights before the first window), so it differs from the
    per-record turnover when the alpha changes between windows.
    """
    picked = [report.record(w, a) for w, a in chosen]
    metrics = []
    prev = equal_weights(len(report.tickers))
    for rec in picked:
        m = rec.metrics
        g = turnover(prev, rec.weights)
        metrics.append(
            MetricSet(
                hi=m.hi,
                turnover=g,
                betc=m.betc,
                avg_drawdown=m.avg_drawdown,
                expected_value=m.expected_value,
                omega=m.omega,
                betc_alt=m.expected_value / g if g > 0 else math.inf,
            )
        )
        prev = rec.weights
    aggregate = summarize(metrics)
    aggregate["path_avg_drawdown"] = _path_drawdown(picked)
    return StrategyRows([a for _, a in chosen], [w for w, _ in chosen], metrics, aggregate)


def fixed_alpha_strategy(report: BacktestReport, alpha: float) -> StrategyRows:
    return _strategy(report, [(w, alpha) for w in report.ok_windows()])


def select_p_star(report: BacktestReport) -> StrategyRows:
    """Best out-of-sample Omega alpha in each window; ties go to the smaller alpha."""
    chosen = []
    for w in report.ok_windows():
        best_alpha, best = None, -math.inf
        for a in report.spec.alpha_grid:
            om = report.record(w, a).metrics.omega
            if om > best:
                best_alpha, best = a, om
        chosen.append((w, best_alpha))
    return _strategy(report, chosen)


def cumulative_paths(report: BacktestReport) -> dict[str, np.ndarray]:
    """Compounded out-of-sample value paths (minus 1) for P*, MV and CGP."""
    out = {}
    for name, strat in (("pstar", report.pstar), ("mv", report.benchmarks["mv"]), ("cgp", report.benchmarks["cgp"])):
        series = [report.record(w, a).portfolio_returns for w, a in zip(strat.window_indices, strat.alphas)]
        p = np.concatenate(series) if series else np.zeros(0)
        out[name] = value_path(p)[1:] - 1.0
    return out
