"""Portfolio selection on correlation networks with idiosyncratic and systemic risk."""

from .backtest import BacktestReport, StrategySpec, dominance_ratio, run_backtest, select_p_star
from .market_data import ReturnsMatrix, WindowPair, load_returns, make_windows
from .metrics import betc, drawdown_series, expected_value, herfindahl, omega_ratio, turnover
from .networks import DependencyMatrix, kendall_matrix, pearson_matrix, tail_matrix
from .optimizer import AllocationResult, PortfolioProblem, solve, solve_cgp, solve_mv
from .systemic import ClusteringProfile, RiskModel, build_risk_model, clustering_coefficients, interconnectedness_matrix

__version__ = "0.1.0"

__all__ = [
    "AllocationResult",
    "BacktestReport",
    "ClusteringProfile",
    "DependencyMatrix",
    "PortfolioProblem",
    "ReturnsMatrix",
    "RiskModel",
    "StrategySpec",
    "WindowPair",
    "betc",
    "build_risk_model",
    "clustering_coefficients",
    "dominance_ratio",
    "drawdown_series",
    "expected_value",
    "herfindahl",
    "interconnectedness_matrix",
    "kendall_matrix",
    "load_returns",
    "make_windows",
    "omega_ratio",
    "pearson_matrix",
    "run_backtest",
    "select_p_star",
    "solve",
    "solve_cgp",
    "solve_mv",
    "tail_matrix",
    "turnover",
]
