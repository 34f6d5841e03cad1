"""Loading return series and slicing them into rolling calendar-month windows."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
import pandas as pd

from .errors import (
    DataWarning,
    InsufficientHistory,
    MalformedInput,
    NonPositivePrice,
    TooFewAssets,
    TooFewRows,
)


@dataclass(frozen=True)
class ReturnsMatrix:
    """T x N matrix of daily log returns indexed by trading day and ticker."""

    dates: np.ndarray  # datetime64[D], strictly increasing
    tickers: tuple[str, ...]
    values: np.ndarray  # shape (T, N)

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        # C order: row slices then stay contiguous, and reductions round the
        # same way whether a window is used in place or pickled to a worker
        values = np.ascontiguousarray(self.values, dtype=float)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "tickers", tuple(str(t) for t in self.tickers))
        object.__setattr__(self, "values", values)
        if values.ndim != 2 or values.shape != (len(dates), len(self.tickers)):
            raise MalformedInput(
                f"values shape {values.shape} does not match "
                f"{len(dates)} dates x {len(self.tickers)} tickers"
            )
        if len(set(self.tickers)) != len(self.tickers):
            raise MalformedInput("duplicate tickers")
        if len(self.tickers) < 2:
            raise TooFewAssets(f"need at least 2 assets, got {len(self.tickers)}")
        if len(dates) < 2:
            raise TooFewRows(f"need at least 2 rows, got {len(dates)}")
        if np.any(np.diff(dates) <= np.timedelta64(0, "D")):
            raise MalformedInput("dates must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise MalformedInput("returns contain NaN or Inf")

    @property
    def n_days(self) -> int:
        return self.values.shape[0]

    @property
    def n_assets(self) -> int:
        return self.values.shape[1]

    @property
    def months(self) -> np.ndarray:
        return self.dates.astype("datetime64[M]")

    def slice_rows(self, start: int, stop: int) -> ReturnsMatrix:
        """Row slice sharing memory with the parent matrix.

        Bypasses the minimum-row validation so that thin out-of-sample
        segments can still be represented.
        """
        view = object.__new__(ReturnsMatrix)
        object.__setattr__(view, "dates", self.dates[start:stop])
        object.__setattr__(view, "tickers", self.tickers)
        object.__setattr__(view, "values", self.values[start:stop])
        return view

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, index=pd.DatetimeIndex(self.dates), columns=list(self.tickers))


@dataclass(frozen=True)
class WindowPair:
    window_index: int  # 1-based
    in_sample: ReturnsMatrix
    out_of_sample: ReturnsMatrix


def _read_table(path: Path, layout: str) -> pd.DataFrame:
    """Return a date x ticker frame with NaN for missing cells."""
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except (OSError, UnicodeDecodeError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise MalformedInput(f"cannot parse {path}: {exc}") from exc
    raw.columns = [c.strip() for c in raw.columns]
    if not raw.columns.size or raw.columns[0] != "date":
        raise MalformedInput("first column must be 'date'")

    try:
        dates = pd.to_datetime(raw["date"].str.strip(), format="%Y-%m-%d")
    except (ValueError, TypeError) as exc:
        raise MalformedInput(f"bad date value: {exc}") from exc

    if layout == "long":
        if list(raw.columns) != ["date", "ticker", "value"]:
            raise MalformedInput("long format header must be exactly date,ticker,value")
        frame = pd.DataFrame(
            {"date": dates, "ticker": raw["ticker"].str.strip(), "value": _to_float(raw["value"])}
        )
        if (frame["ticker"] == "").any():
            raise MalformedInput("empty ticker")
        if frame.duplicated(["date", "ticker"]).any():
            raise MalformedInput("duplicate (date, ticker) rows")
        table = frame.pivot(index="date", columns="ticker", values="value")
        table = table.reindex(columns=sorted(table.columns))
    elif layout == "wide":
        if raw.columns.size < 2 or len(set(raw.columns)) != raw.columns.size:
            raise MalformedInput("wide format needs date plus unique ticker columns")
        table = raw.drop(columns="date").apply(_to_float)
        table.index = dates
        if table.index.duplicated().any():
            raise MalformedInput("duplicate dates")
    else:
        raise ValueError(f"unknown layout {layout!r}")
    return table.sort_index()


def _to_float(col: pd.Series) -> pd.Series:
    stripped = col.str.strip()
    out = pd.to_numeric(stripped.where(stripped != ""), errors="coerce")
    bad = out.isna() & (stripped != "")
    if bad.any():
        raise MalformedInput(f"non-numeric value {stripped[bad].iloc[0]!r}")
    return out


def load_returns(
    source: str | Path,
    mode: Literal["prices", "returns"] = "returns",
    layout: Literal["long", "wide"] = "long",
) -> ReturnsMatrix:
    """Read a CSV into a log-return matrix.

    Assets with any missing observation are dropped for the whole run
    with a :class:`DataWarning`. In ``prices`` mode the first row is
    consumed by differencing.
    """
    if mode not in ("prices", "returns"):
        raise ValueError(f"unknown mode {mode!r}")
    table = _read_table(Path(source), layout)

    missing = [t for t in table.columns if table[t].isna().any()]
    for t in missing:
        warnings.warn(f"dropping {t}: missing observations", DataWarning, stacklevel=2)
    table = table.drop(columns=missing)

    if mode == "prices":
        if (table.to_numpy() <= 0).any():
            raise NonPositivePrice("prices must be strictly positive")
        if len(table) < 3:
            raise TooFewRows(f"need at least 3 price rows, got {len(table)}")
        values = np.diff(np.log(table.to_numpy(dtype=float)), axis=0)
        dates = table.index[1:]
    else:
        values = table.to_numpy(dtype=float)
        dates = table.index

    if table.shape[1] < 2:
        raise TooFewAssets(f"need at least 2 assets after dropping, got {table.shape[1]}")
    if len(dates) < 2:
        raise TooFewRows(f"need at least 2 return rows, got {len(dates)}")
    return ReturnsMatrix(dates.to_numpy().astype("datetime64[D]"), tuple(table.columns), values)


def make_windows(
    returns: ReturnsMatrix, in_months: int = 12, out_months: int = 1, step_months: int = 1
) -> list[WindowPair]:
    """Split returns into calendar-month aligned in-sample/out-of-sample pairs.

    Months are counted over the contiguous calendar range from the first to
    the last observed month, so the number of windows is
    ``(total_months - in_months - out_months) // step_months + 1``.
    """
    if in_months < 1 or out_months < 1 or step_months < 1:
        raise ValueError("in_months, out_months and step_months must all be >= 1")
    months = returns.months
    first = months[0]
    total = int((months[-1] - first).astype(int)) + 1
    spare = total - in_months - out_months
    if spare < 0:
        raise InsufficientHistory(
            f"{total} months of data cannot hold {in_months} in-sample + {out_months} out-of-sample months"
        )
    offsets = (months - first).astype(int)
    # row index where each month offset begins
    bounds = np.searchsorted(offsets, np.arange(total + 1), side="left")

    windows = []
    for w in range(spare // step_months + 1):
        a = w * step_months
        b = a + in_months
        c = b + out_months
        ins = returns.slice_rows(bounds[a], bounds[b])
        oos = returns.slice_rows(bounds[b], bounds[c])
        if ins.n_days < 2:
            raise InsufficientHistory(f"window {w + 1}: in-sample has {ins.n_days} trading days")
        if oos.n_days < 1:
            raise InsufficientHistory(f"window {w + 1}: out-of-sample period has no trading days")
        if ins.n_days < returns.n_assets + 2:
            warnings.warn(
                f"window {w + 1}: {ins.n_days} in-sample days for {returns.n_assets} assets; "
                "covariance will be rank deficient",
                DataWarning,
                stacklevel=2,
            )
        windows.append(WindowPair(w + 1, ins, oos))
    return windows
