"""Network clustering coefficients and the systemic-risk matrix H."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import TickerMismatch, TooFewAssets
from .market_data import ReturnsMatrix
from .networks import DependencyMatrix

RIDGE_FLOOR = 1e-10


@dataclass(frozen=True)
class ClusteringProfile:
    tickers: tuple[str, ...]
    coefficients: np.ndarray


@dataclass(frozen=True)
class RiskModel:
    """Covariance and systemic-risk matrices for one in-sample window."""

    tickers: tuple[str, ...]
    sigma: np.ndarray
    Sigma: np.ndarray
    C: np.ndarray
    H: np.ndarray
    clustering: ClusteringProfile | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_assets(self) -> int:
        return len(self.tickers)


def clustering_coefficients(dep: DependencyMatrix) -> ClusteringProfile:
    """Geometric-mean triangle intensity of each node.

    Negative weights are clipped to zero and the rest divided by the
    largest weight, then
    ``C_i = sum_{j,k} (w_ij w_jk w_ki)^(1/3) / ((N-1)(N-2))``
    over distinct ``j, k != i``. A graph with no positive edge gives all
    zeros.
    """
    n = dep.n_assets
    if n < 3:
        raise TooFewAssets(f"clustering needs at least 3 nodes, got {n}")
    w = np.maximum(np.asarray(dep.weights, dtype=float), 0.0)
    np.fill_diagonal(w, 0.0)
    top = w.max()
    if top <= 0:
        return ClusteringProfile(dep.tickers, np.zeros(n))
    root = np.cbrt(w / top)
    # diag(W^3) sums cube-root triangle products over ordered pairs (j, k)
    triangles = np.einsum("ij,ji->i", root @ root, root)
    coeffs = np.clip(triangles / ((n - 1) * (n - 2)), 0.0, 1.0)
    return ClusteringProfile(dep.tickers, coeffs)


def interconnectedness_matrix(profile: ClusteringProfile) -> np.ndarray:
    """``c_ij = C_i C_j`` off the diagonal, 1 on it."""
    c = np.asarray(profile.coefficients, dtype=float)
    out = np.outer(c, c)
    np.fill_diagonal(out, 1.0)
    return out


def sample_covariance(values: np.ndarray) -> tuple[np.ndarray, float]:
    """Unbiased covariance with a minimal ridge if it is numerically indefinite.

    Returns the (possibly shifted) matrix and the ridge that was added.
    """
    cov = np.cov(values, rowvar=False, ddof=1)
    cov = 0.5 * (cov + cov.T)
    lam_min = float(np.linalg.eigvalsh(cov)[0])
    ridge = 0.0
    if lam_min < 0:
        ridge = -lam_min + RIDGE_FLOOR
        cov = cov + ridge * np.eye(cov.shape[0])
    return cov, ridge


def build_risk_model(
    window: ReturnsMatrix,
    dep: DependencyMatrix,
    covariance: tuple[np.ndarray, float] | None = None,
) -> RiskModel:
    """Assemble Sigma, sigma, C and ``H = diag(sigma) C diag(sigma)``.

    ``covariance`` lets callers reuse a ``sample_covariance`` result
    computed once per window across network kinds.
    """
    if tuple(window.tickers) != tuple(dep.tickers):
        raise TickerMismatch("window and dependency matrix cover different tickers")
    if window.n_assets < 3:
        raise TooFewAssets(f"risk model needs at least 3 assets, got {window.n_assets}")
    Sigma, ridge = covariance if covariance is not None else sample_covariance(window.values)
    sigma = np.sqrt(np.maximum(np.diag(Sigma) - ridge, 0.0))
    profile = clustering_coefficients(dep)
    C = interconnectedness_matrix(profile)
    H = sigma[:, None] * C * sigma[None, :]
    return RiskModel(
        tickers=window.tickers,
        sigma=sigma,
        Sigma=Sigma,
        C=C,
        H=H,
        clustering=profile,
        diagnostics={"covariance_ridge": ridge, "network": dep.kind},
    )
