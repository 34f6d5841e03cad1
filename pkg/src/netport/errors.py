"""Exception hierarchy shared across the package."""


class NetportError(Exception):
    """Base class for every error raised by netport."""


class ConfigError(NetportError):
    """Invalid run configuration."""


class DataError(NetportError):
    """Input data cannot be turned into a usable returns matrix."""


class MalformedInput(DataError):
    pass


class NonPositivePrice(DataError):
    pass


class TooFewAssets(DataError):
    pass


class TooFewRows(DataError):
    pass


class InsufficientHistory(DataError):
    pass


class EstimationError(NetportError):
    """A dependency estimator cannot be evaluated on the given window."""


class ZeroVariance(EstimationError):
    def __init__(self, tickers):
        self.tickers = list(tickers)
        super().__init__(f"zero variance for: {', '.join(map(str, self.tickers))}")


class QTooSmall(EstimationError):
    pass


class SolverError(NetportError):
    pass


class Infeasible(SolverError):
    pass


class MetricError(NetportError):
    pass


class BadWeights(MetricError):
    pass


class TickerMismatch(MetricError):
    pass


class ShapeMismatch(MetricError):
    pass


class NonPositiveValue(MetricError):
    pass


class BacktestError(NetportError):
    """Too many failed solves for the report to be meaningful."""


class DataWarning(UserWarning):
    """Emitted when assets are dropped or a window is thin."""
