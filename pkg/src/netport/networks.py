"""Pairwise dependency estimators used as weighted adjacency matrices.

Three measures are supported: Pearson correlation, Kendall's tau (tau-a,
ties count as zero) and the empirical lower-tail dependence at level q.
Every matrix is symmetric with a zero diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import QTooSmall, ZeroVariance
from .market_data import ReturnsMatrix

Kind = Literal["pearson", "kendall", "tail"]
KINDS: tuple[str, ...] = ("pearson", "kendall", "tail")

DEFAULT_TAIL_Q = 0.05


@dataclass(frozen=True)
class DependencyMatrix:
    kind: str
    tickers: tuple[str, ...]
    weights: np.ndarray

    @property
    def n_assets(self) -> int:
        return len(self.tickers)


def _finish(kind: str, tickers, weights: np.ndarray, lo: float) -> DependencyMatrix:
    weights = 0.5 * (weights + weights.T)
    np.clip(weights, lo, 1.0, out=weights)
    np.fill_diagonal(weights, 0.0)
    return DependencyMatrix(kind, tuple(tickers), weights)


def pearson_matrix(window: ReturnsMatrix) -> DependencyMatrix:
    """Pearson correlation from population (1/n) moments."""
    r = window.values
    centered = r - r.mean(axis=0)
    std = np.sqrt((centered**2).mean(axis=0))
    # a constant column can leave rounding residue in the centered values
    flat = np.ptp(r, axis=0) == 0
    if flat.any():
        raise ZeroVariance([t for t, f in zip(window.tickers, flat) if f])
    z = centered / std
    rho = z.T @ z / r.shape[0]
    return _finish("pearson", window.tickers, rho, -1.0)


def _pair_signs(r: np.ndarray) -> np.ndarray:
    """sgn(r[h] - r[k]) for every h < k, one row per column of ``r``."""
    n = r.shape[0]
    h, k = np.triu_indices(n, k=1)
    # +-1 partial sums are exact in float32 while the pair count stays below 2**24
    dtype = np.float32 if h.size < 2**24 else np.float64
    return np.sign(r[h] - r[k]).T.astype(dtype)


def kendall_matrix(window: ReturnsMatrix) -> DependencyMatrix:
    """Kendall's tau-a with ``sgn(0) = 0``.

    Evaluates the full pair sum exactly: the ordered double sum over
    ``h != k`` is twice the sum over ``h < k``, and the sign products are
    accumulated as a single matrix product over the pair axis.
    """
    r = window.values
    n = r.shape[0]
    if n < 2:
        raise ValueError("kendall_matrix needs at least 2 rows")
    signs = _pair_signs(r)
    concordance = (signs @ signs.T).astype(float)
    tau = 2.0 * concordance / (n * (n - 1))
    return _finish("kendall", window.tickers, tau, -1.0)


def tail_sets(r: np.ndarray, q: float) -> tuple[np.ndarray, int]:
    """Boolean (n, N) membership of each day in each column's lower tail."""
    n = r.shape[0]
    m = int(np.floor(n * q + 1e-12))
    if m < 1:
        raise QTooSmall(f"floor(n*q) = 0 for n={n}, q={q}")
    thresholds = np.partition(r, m - 1, axis=0)[m - 1]
    return r <= thresholds, m


def tail_matrix(window: ReturnsMatrix, q: float = DEFAULT_TAIL_Q) -> DependencyMatrix:
    """Empirical lower-tail dependence at level ``q``.

    With ``m = floor(n q)`` and each column's threshold set to its m-th
    smallest value, the weight is the number of days on which both assets
    sit in their lower tail divided by ``m``, averaged over both
    conditioning directions and clipped to [0, 1].
    """
    if not 0 < q <= 0.5:
        raise ValueError(f"q must lie in (0, 0.5], got {q}")
    inside, m = tail_sets(window.values, q)
    f = inside.astype(float)
    joint = f.T @ f / m
    return _finish("tail", window.tickers, joint, 0.0)


def dependency_matrix(window: ReturnsMatrix, kind: str, tail_q: float = DEFAULT_TAIL_Q) -> DependencyMatrix:
    if kind == "pearson":
        return pearson_matrix(window)
    if kind == "kendall":
        return kendall_matrix(window)
    if kind == "tail":
        return tail_matrix(window, tail_q)
    raise ValueError(f"unknown network kind {kind!r}")


def write_matrix_csv(dep: DependencyMatrix, path) -> None:
    """Dump weights with a ticker header row and ticker first column."""
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(["", *dep.tickers])
        for t, row in zip(dep.tickers, dep.weights):
            out.writerow([t, *(repr(float(v)) for v in row)])
