import numpy as np
import pytest

from netport.market_data import ReturnsMatrix


def make_returns(values, start="2020-01-01", tickers=None):
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    t, n = values.shape
    dates = np.datetime64(start) + np.arange(t)
    tickers = tickers or [f"A{i}" for i in range(n)]
    return ReturnsMatrix(dates, tickers, values)


def columns(*cols):
    return make_returns(np.column_stack(cols))


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)
