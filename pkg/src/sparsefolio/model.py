"""Problem assembly and evaluation for constrained L1-penalized variance.

The optimization target is (1/2) x'Cx + lam*||x||_1 subject to two linear
equalities: the portfolio return hits a target (x'mu = e) and the weights
sum to one (x'1 = 1).  Both rows are stacked into a single 2 x n
constraint matrix so downstream solvers see one system Dx = b.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market_data import AssetStats

DEFAULT_ZERO_TOL = 1e-9


@dataclass(frozen=True)
class PortfolioProblem:
    C: np.ndarray
    mu: np.ndarray
    e: float
    D: np.ndarray
    b: np.ndarray
    n: int

    def __post_init__(self):
        for name in ("C", "mu", "D", "b"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n = self.n
        if self.mu.shape != (n,) or self.C.shape != (n, n):
            raise ValueError("mean/covariance shapes do not match asset count")
        if self.D.shape != (2, n) or self.b.shape != (2,):
            raise ValueError("constraint system must be 2 x n with a length-2 rhs")
        if not (np.array_equal(self.D[0], self.mu) and np.array_equal(self.D[1], np.ones(n))):
            raise ValueError("constraint rows must be the mean vector and all-ones")
        if not (self.b[0] == self.e and self.b[1] == 1.0):
            raise ValueError("constraint rhs must be (target return, 1)")
        try:
            np.linalg.cholesky(self.C)
        except np.linalg.LinAlgError:
            raise ValueError("covariance is not positive definite") from None


@dataclass(frozen=True)
class Portfolio:
    """A weight vector plus the tolerance that defines a 'real' position."""

    weights: np.ndarray
    zero_tol: float = DEFAULT_ZERO_TOL

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", weights)
        if weights.ndim != 1:
            raise ValueError("weights must be a vector")
        if not np.isfinite(weights).all():
            raise ValueError("weights contain non-finite entries")
        if self.zero_tol <= 0:
            raise ValueError("zero_tol must be positive")

    @property
    def n(self) -> int:
        return self.weights.shape[0]


def build_problem(stats: AssetStats, e: float,
                  allow_out_of_range: bool = False) -> PortfolioProblem:
    """Stack the return and budget constraints around the estimated moments.

    The target e must lie between the smallest and largest asset mean unless
    allow_out_of_range is set.  All-equal means are rejected outright: the
    two constraint rows would be parallel and every x-step singular.
    """
    mu = stats.mu
    n = mu.shape[0]
    spread = float(mu.max() - mu.min())
    if spread <= 1e-12 * max(1.0, float(np.abs(mu).max())):
        raise ValueError(
            "all asset means are equal; the return constraint duplicates the "
            "budget constraint and the problem is degenerate"
        )
    if not allow_out_of_range and not (mu.min() <= e <= mu.max()):
        raise ValueError(
            f"target return {e} outside the attainable mean range "
            f"[{mu.min()}, {mu.max()}] (pass allow_out_of_range to override)"
        )
    D = np.vstack([mu, np.ones(n)])
    b = np.array([e, 1.0])
    return PortfolioProblem(C=stats.C, mu=mu, e=float(e), D=D, b=b, n=n)


def objective_value(C: np.ndarray, weights: np.ndarray, lam: float) -> float:
    return 0.5 * float(weights @ C @ weights) + lam * float(np.abs(weights).sum())


def evaluate_objective(problem: PortfolioProblem, portfolio: Portfolio,
                       lam: float) -> float:
    if portfolio.n != problem.n:
        raise ValueError(f"portfolio has {portfolio.n} weights, problem has {problem.n}")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    return objective_value(problem.C, portfolio.weights, lam)


def constraint_violation(problem: PortfolioProblem,
                         portfolio: Portfolio) -> tuple[float, float]:
    """Absolute miss of the return target and of the budget, as a pair."""
    if portfolio.n != problem.n:
        raise ValueError(f"portfolio has {portfolio.n} weights, problem has {problem.n}")
    w = portfolio.weights
    return (abs(float(w @ problem.mu) - problem.e), abs(float(w.sum()) - 1.0))


def count_short_positions(portfolio: Portfolio) -> int:
    """Number of weights strictly below -zero_tol."""
    return int(np.sum(portfolio.weights < -portfolio.zero_tol))
