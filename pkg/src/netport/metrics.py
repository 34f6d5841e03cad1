"""Portfolio performance measures.

Concentration (modified Herfindahl), turnover, break-even transaction
cost, drawdown, expected value and the Omega ratio. Return inputs are
daily log returns; the portfolio return series is the weighted sum of
constituent log returns.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import BadWeights, NonPositiveValue, ShapeMismatch, TickerMismatch

WEIGHT_TOL = 1e-8
BPS = 1e4


@dataclass(frozen=True)
class MetricSet:
    hi: float
    turnover: float
    betc: float
    avg_drawdown: float
    expected_value: float
    omega: float  # math.inf when there is no loss mass
    betc_alt: float = math.nan  # extra diagnostic: mean return / turnover

    @property
    def omega_infinite(self) -> bool:
        return math.isinf(self.omega)

    def as_dict(self) -> dict:
        return asdict(self)


def _check_weights(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise BadWeights("weights must be a vector of length >= 2")
    if not np.all(np.isfinite(x)) or x.min() < -WEIGHT_TOL:
        raise BadWeights("weights must be finite and nonnegative")
    if abs(x.sum() - 1.0) > WEIGHT_TOL:
        raise BadWeights(f"weights sum to {x.sum()!r}, expected 1")
    return x


def herfindahl(x) -> float:
    """Modified Herfindahl index: 0 for equal weights, 1 for a single asset."""
    x = _check_weights(x)
    n = x.size
    if np.ptp(x) == 0:
        return 0.0
    # same value as (x'x - 1/n) / (1 - 1/n) when sum(x) = 1, exact at the one-asset corner
    return float(((n * x - 1.0) ** 2).sum() / (n * (n - 1)))


def turnover(x_prev, x_new, tickers_prev=None, tickers_new=None) -> float:
    """L1 distance between the weights before and after rebalancing."""
    if tickers_prev is not None and tickers_new is not None and tuple(tickers_prev) != tuple(tickers_new):
        raise TickerMismatch("turnover needs both portfolios on the same tickers")
    a = _check_weights(x_prev)
    b = _check_weights(x_new)
    if a.shape != b.shape:
        raise TickerMismatch(f"weight vectors have lengths {a.size} and {b.size}")
    return float(np.abs(b - a).sum())


def equal_weights(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def portfolio_returns(out_returns, x) -> np.ndarray:
    r = np.asarray(out_returns, dtype=float)
    x = np.asarray(x, dtype=float)
    if r.ndim != 2 or r.shape[1] != x.size:
        raise ShapeMismatch(f"returns of shape {r.shape} do not match {x.size} weights")
    return r @ x


def betc(out_returns, x, h: int | None = None) -> float:
    """``h * sum_t (R_out x)_t`` over the out-of-sample period."""
    p = portfolio_returns(out_returns, x)
    if h is None:
        h = p.size
    if h != p.size:
        raise ShapeMismatch(f"h = {h} but the out-of-sample block has {p.size} rows")
    return float(h * p.sum())


def value_path(log_returns, start: float = 1.0) -> np.ndarray:
    """Portfolio values including the starting value, compounding simple returns."""
    r = np.asarray(log_returns, dtype=float)
    # 1 + (exp(r) - 1) compounds to exp(cumsum r)
    return start * np.exp(np.concatenate([[0.0], np.cumsum(r)]))


def drawdown_series(values) -> np.ndarray:
    """``P_t / max_{s<=t} P_s - 1``; every entry lies in (-1, 0]."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise NonPositiveValue("empty value path")
    if not np.all(v > 0):
        raise NonPositiveValue("portfolio values must be positive")
    return v / np.maximum.accumulate(v) - 1.0


def average_drawdown(log_returns) -> float:
    """Mean drawdown over the days of a return series, measured from a starting value of 1."""
    dd = drawdown_series(value_path(log_returns))
    return float(dd[1:].mean())


def expected_value(returns) -> float:
    r = np.asarray(returns, dtype=float)
    if r.size == 0:
        raise ValueError("expected_value of an empty series")
    return float(r.mean())


def omega_ratio(returns, threshold: float = 0.0) -> float:
    """Gain mass above ``threshold`` over loss mass below it.

    Returns ``math.inf`` when there is no loss mass.
    """
    r = np.asarray(returns, dtype=float)
    if r.size == 0:
        raise ValueError("omega_ratio of an empty series")
    gains = np.maximum(r - threshold, 0.0).sum()
    losses = np.maximum(threshold - r, 0.0).sum()
    if losses == 0:
        return math.inf
    with np.errstate(over="ignore"):  # subnormal loss mass: the ratio is inf
        return float(gains / losses)


def window_metrics(out_returns, x, x_prev, threshold: float = 0.0) -> tuple[MetricSet, np.ndarray]:
    """All measures for weights ``x`` held through one out-of-sample block."""
    p = portfolio_returns(out_returns, x)
    g = turnover(x_prev, x)
    ev = expected_value(p)
    metrics = MetricSet(
        hi=herfindahl(x),
        turnover=g,
        betc=betc(out_returns, x),
        avg_drawdown=average_drawdown(p),
        expected_value=ev,
        omega=omega_ratio(p, threshold),
        betc_alt=ev / g if g > 0 else math.inf,
    )
    return metrics, p
