"""One-factor synthetic daily log returns for self-contained runs."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .market_data import ReturnsMatrix

DAYS_PER_MONTH = 21
START_MONTH = "2014-04"


def _dates(n_months: int, start: str = START_MONTH) -> np.ndarray:
    months = np.datetime64(start, "M") + np.arange(n_months)
    days = np.arange(DAYS_PER_MONTH)
    return (months.astype("datetime64[D]")[:, None] + days[None, :]).ravel()


def synthetic_returns(
    n_assets: int,
    n_months: int,
    seed: int = 0,
    correlation_level: float = 0.3,
    start: str = START_MONTH,
) -> ReturnsMatrix:
    """Daily log returns ``drift_i + vol_i (sqrt(rho) f_t + sqrt(1 - rho) e_ti)``.

    Factor and idiosyncratic shocks are unit-variance Student-t (5 dof),
    so ``rho`` is the pairwise correlation of the shocks; ``rho = 1``
    removes the idiosyncratic part entirely. Each month has 21 trading
    days dated on calendar days 1 to 21.
    """
    if n_assets < 3:
        raise ValueError(f"n_assets must be >= 3, got {n_assets}")
    if n_months < 14:
        raise ValueError(f"n_months must be >= 14, got {n_months}")
    if not 0.0 <= correlation_level <= 1.0:
        raise ValueError(f"correlation_level must lie in [0, 1], got {correlation_level}")
    rng = np.random.default_rng(seed)
    t = n_months * DAYS_PER_MONTH
    dof = 5.0
    unit = np.sqrt((dof - 2.0) / dof)
    factor = rng.standard_t(dof, size=(t, 1)) * unit
    noise = rng.standard_t(dof, size=(t, n_assets)) * unit
    drift = rng.normal(2e-4, 4e-4, size=n_assets)
    vol = rng.uniform(0.01, 0.03, size=n_assets)
    shocks = np.sqrt(correlation_level) * factor
    if correlation_level < 1.0:
        shocks = shocks + np.sqrt(1.0 - correlation_level) * noise
    values = drift + vol * shocks
    width = len(str(n_assets - 1))
    tickers = tuple(f"S{i:0{width}d}" for i in range(n_assets))
    return ReturnsMatrix(_dates(n_months, start), tickers, values)


def write_long_csv(returns: ReturnsMatrix, path) -> Path:
    """Write ``date,ticker,value`` rows in date then ticker order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["date", "ticker", "value"])
        for d, row in zip(returns.dates, returns.values):
            day = str(d)
            for ticker, v in zip(returns.tickers, row):
                out.writerow([day, ticker, repr(float(v))])
    return path


def write_wide_csv(values_by_ticker: dict, dates, path) -> Path:
    """Write a ``date,<ticker>,...`` table; ``None`` or NaN cells are left empty."""
    path = Path(path)
    tickers = list(values_by_ticker)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["date", *tickers])
        for i, d in enumerate(dates):
            row = [str(np.datetime64(d, "D"))]
            for t in tickers:
                v = values_by_ticker[t][i]
                row.append("" if v is None or v != v else repr(float(v)))
            out.writerow(row)
    return path
