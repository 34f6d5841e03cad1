"""Long-only mean/variance/systemic-risk allocation.

Minimizes ``alpha x'Hx + (1 - alpha) x'Sigma x`` subject to full
investment, a target mean return and ``x >= 0``. The upper bound
``x <= 1`` is implied by the other constraints and never becomes active.

The solver is a primal active-set method on the box-free simplex slice.
Every result carries a KKT certificate computed on the normalized
problem (Q divided by its largest absolute entry, return constraint
rescaled to unit range), which makes the tolerance meaningful regardless
of the units of the input returns.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import Infeasible
from .systemic import RIDGE_FLOOR, RiskModel

TIE_BREAK = 1e-12
DEGENERATE_SPREAD = 1e-12
# free weights this close below zero are roundoff, not a blocking step
PRIMAL_SLACK = 1e-14


@dataclass(frozen=True)
class PortfolioProblem:
    risk: RiskModel
    mu: np.ndarray
    r_p: float
    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        mu = np.asarray(self.mu, dtype=float)
        if mu.shape != (self.risk.n_assets,):
            raise ValueError(f"mu has shape {mu.shape}, expected ({self.risk.n_assets},)")
        object.__setattr__(self, "mu", mu)

    def objective_matrix(self) -> np.ndarray:
        q = self.alpha * self.risk.H + (1.0 - self.alpha) * self.risk.Sigma
        return 0.5 * (q + q.T)


@dataclass
class AllocationResult:
    weights: np.ndarray
    objective: float
    systemic_term: float
    idiosyncratic_term: float
    kkt_residual: float
    ridge_applied: float
    iterations: int
    converged: bool = True

    @property
    def status(self) -> str:
        return "optimal" if self.converged else "unconverged"

    def diagnostics(self) -> dict:
        out = asdict(self)
        del out["weights"]
        out["status"] = self.status
        return out


@dataclass
class _QPSolution:
    x: np.ndarray
    residual: float
    ridge: float
    iterations: int
    converged: bool


def _constraints(mu: np.ndarray, r_p: float) -> tuple[np.ndarray, np.ndarray]:
    n = mu.size
    if mu.max() - mu.min() < DEGENERATE_SPREAD:
        return np.ones((1, n)), np.array([1.0])
    shifted = mu - r_p
    return np.vstack([np.ones(n), shifted / np.abs(shifted).max()]), np.array([1.0, 0.0])


def _ensure_rank(free: np.ndarray, mu: np.ndarray, m: int) -> None:
    """Grow the free set until its return column spans both equality rows."""
    if m < 2:
        if not free.any():
            free[0] = True
        return
    idx = np.flatnonzero(free)
    if idx.size >= 2 and np.ptp(mu[idx]) > 0:
        return
    anchor = mu[idx[0]]
    gap = np.abs(mu - anchor)
    gap[gap == 0] = np.inf
    free[int(np.argmin(gap))] = True


def _cold_start(mu: np.ndarray, r_p: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    n = mu.size
    x = np.zeros(n)
    free = np.zeros(n, dtype=bool)
    if m == 1:
        x[:] = 1.0 / n
        free[:] = True
        return x, free
    below = np.flatnonzero(mu <= r_p)
    above = np.flatnonzero(mu >= r_p)
    i = below[np.argmax(mu[below])]
    j = above[np.argmin(mu[above])]
    if mu[i] == mu[j]:
        x[i] = 1.0
        free[i] = True
    else:
        x[i] = (mu[j] - r_p) / (mu[j] - mu[i])
        x[j] = 1.0 - x[i]
        free[[i, j]] = True
    _ensure_rank(free, mu, m)
    return x, free


def _warm_start(x0, A, b, mu, m) -> tuple[np.ndarray, np.ndarray] | None:
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != mu.shape or x0.min() < -1e-12 or np.abs(A @ x0 - b).max() > 1e-10:
        return None
    x = np.maximum(x0, 0.0)
    free = x > 0
    _ensure_rank(free, mu, m)
    return x, free


def _kkt_solve(Q, A, b, F):
    k = F.size
    m = A.shape[0]
    K = np.zeros((k + m, k + m))
    K[:k, :k] = Q[np.ix_(F, F)]
    AF = A[:, F]
    K[:k, k:] = AF.T
    K[k:, :k] = AF
    rhs = np.concatenate([np.zeros(k), b])
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    # stationarity reads Q_FF x_F = A_F' lam, so lam is minus the solved block
    return sol[:k], -sol[k:]


def _multipliers(Q, A, x, F):
    g = Q @ x
    lam = np.linalg.lstsq(A[:, F].T, g[F], rcond=None)[0]
    return lam


def _residual(Q, A, b, x, lam, free) -> float:
    s = Q @ x - A.T @ lam
    parts = [np.abs(A @ x - b).max(), max(0.0, -x.min())]
    if free.any():
        parts.append(np.abs(s[free]).max())
    if (~free).any():
        parts.append(max(0.0, -s[~free].min()))
    return float(max(parts))


def solve_simplex_qp(
    Q: np.ndarray,
    mu: np.ndarray,
    r_p: float,
    tol: float = 1e-8,
    max_iter: int = 10_000,
    warm_start: np.ndarray | None = None,
) -> _QPSolution:
    """Minimize x'Qx on {x >= 0, sum x = 1, mu'x = r_p}."""
    n = mu.size
    scale = float(np.abs(Q).max()) or 1.0
    Qn = Q / scale
    ridge = 0.0
    try:
        np.linalg.cholesky(Qn)
    except np.linalg.LinAlgError:
        lam_min = float(np.linalg.eigvalsh(Qn)[0])
        if lam_min < 0:
            ridge = -lam_min + RIDGE_FLOOR
    Qs = Qn + (ridge + TIE_BREAK) * np.eye(n)

    A, b = _constraints(mu, r_p)
    m = A.shape[0]
    start = _warm_start(warm_start, A, b, mu, m) if warm_start is not None else None
    x, free = start if start is not None else _cold_start(mu, r_p, m)

    dual_tol = min(1e-3 * tol, 1e-11)
    bland_after = 5 * n
    lam = None
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        F = np.flatnonzero(free)
        x_hat, lam_hat = _kkt_solve(Qs, A, b, F)
        if x_hat.min() >= -PRIMAL_SLACK:
            x[F] = np.maximum(x_hat, 0.0)
            lam = lam_hat
            bound = np.flatnonzero(~free)
            if bound.size == 0:
                converged = True
                break
            s = Qs[bound] @ x - A[:, bound].T @ lam
            negative = s < -dual_tol
            if not negative.any():
                converged = True
                break
            pick = np.flatnonzero(negative)[0] if it > bland_after else np.argmin(s)
            free[bound[pick]] = True
        else:
            lam = None
            step = x_hat - x[F]
            shrinking = x_hat < -PRIMAL_SLACK
            ratios = x[F][shrinking] / -step[shrinking]
            t = max(float(ratios.min()), 0.0)
            block = F[shrinking][np.argmin(ratios)]
            x[F] += t * step
            x[block] = 0.0
            free[block] = False

    F = np.flatnonzero(free)
    if lam is None:
        lam = _multipliers(Qs, A, x, F)
    residual = _residual(Qs, A, b, x, lam, free)
    x = np.clip(x, 0.0, 1.0)
    if m == 2:
        residual = max(residual, abs(float(mu @ x) - r_p))
    return _QPSolution(x, residual, ridge * scale, it, converged)


def _check_feasible(mu: np.ndarray, r_p: float) -> None:
    if not np.isfinite(r_p) or r_p < mu.min() or r_p > mu.max():
        raise Infeasible(f"target return {r_p!r} outside [{mu.min()!r}, {mu.max()!r}]")


def solve(
    problem: PortfolioProblem,
    tol: float = 1e-8,
    max_iter: int = 10_000,
    warm_start: np.ndarray | None = None,
) -> AllocationResult:
    """Solve the scalarized bi-objective problem for one alpha.

    Raises :class:`Infeasible` when the target return lies outside the
    range of asset means. Hitting ``max_iter`` returns the last feasible
    iterate with ``converged=False``.
    """
    _check_feasible(problem.mu, problem.r_p)
    Q = problem.objective_matrix()
    sol = solve_simplex_qp(Q, problem.mu, float(problem.r_p), tol, max_iter, warm_start)
    x = sol.x
    risk = problem.risk
    return AllocationResult(
        weights=x,
        objective=float(x @ Q @ x),
        systemic_term=float(x @ risk.H @ x),
        idiosyncratic_term=float(x @ risk.Sigma @ x),
        kkt_residual=sol.residual,
        ridge_applied=sol.ridge,
        iterations=sol.iterations,
        converged=sol.converged and sol.residual <= tol,
    )


def solve_mv(risk: RiskModel, mu, r_p: float, **kwargs) -> AllocationResult:
    """Plain mean-variance allocation (alpha = 0)."""
    return solve(PortfolioProblem(risk, mu, r_p, 0.0), **kwargs)


def solve_cgp(risk: RiskModel, mu, r_p: float, **kwargs) -> AllocationResult:
    """Clustering-only allocation (alpha = 1)."""
    return solve(PortfolioProblem(risk, mu, r_p, 1.0), **kwargs)


def solve_sweep(
    risk: RiskModel, mu, r_p: float, alphas, tol: float = 1e-8, max_iter: int = 10_000
) -> list[AllocationResult]:
    """Solve for every alpha in order, warm-starting each from the previous optimum."""
    results = []
    previous = None
    for alpha in alphas:
        res = solve(PortfolioProblem(risk, mu, r_p, float(alpha)), tol, max_iter, warm_start=previous)
        results.append(res)
        previous = res.weights if res.converged else None
    return results
