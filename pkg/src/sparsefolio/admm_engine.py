"""Consensus ADMM for L1-penalized variance under linear equality constraints.

The smooth piece (quadratic plus the two equalities) is carried by x and
solved exactly through the cached KKT factorization; the L1 piece is
carried by a copy z and solved by soft thresholding; the scaled dual y
ties them together.  Iteration k:

    x  <-  block solve of (C + rho*I, D) against (rho*z + y, b)
    z  <-  soft_threshold(x - y/rho, lam/rho)
    y  <-  y + rho*(z - x)

followed by the short-sale guard on lambda and, on its cadence, one
penalty update.  The primal residual is z - x and the dual residual is
-rho*(z - z_prev); both enter the relative stopping test below.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .kkt import factorize, solve_x_update
from .lambda_controller import LambdaSchedule, maybe_adjust
from .model import Portfolio, PortfolioProblem, count_short_positions, objective_value
from .penalty import PenaltyConfig, PenaltyState, SpectralSnapshot, compute_ybar

TERMINATION_CONVERGED = "converged"
TERMINATION_MAX_ITER = "max_iter"
TERMINATION_NUMERICAL = "numerical_failure"


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-6
    max_iter: int = 5000
    penalty: PenaltyConfig = field(default_factory=PenaltyConfig)
    lambda_schedule: LambdaSchedule = field(
        default_factory=lambda: LambdaSchedule.fixed(0.0))
    record_history: bool = False
    shorts_from_z: bool = False
    zero_tol: float = 1e-9

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.zero_tol <= 0:
            raise ValueError("zero_tol must be positive")


@dataclass(frozen=True)
class IterateState:
    """One committed ADMM iterate; k = -1 denotes the initialization."""

    x: np.ndarray
    z: np.ndarray
    y: np.ndarray
    rho: float
    lam: float
    k: int


@dataclass
class SolveHistory:
    """Per-iteration diagnostics; every list has one entry per iteration."""

    r_norm: list = field(default_factory=list)
    d_norm: list = field(default_factory=list)
    rho: list = field(default_factory=list)
    lam: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    feasibility: list = field(default_factory=list)


@dataclass(frozen=True)
class SolveResult:
    weights: Portfolio
    objective: float
    iterations: int
    termination: str
    short_count: int
    final_state: IterateState
    r_norm: float
    d_norm: float
    lambda_initial: float
    lambda_final: float
    lambda_adjustments: int
    rho_final: float
    consensus_gap: float
    history: Optional[SolveHistory]


class ResidualNorms(NamedTuple):
    r_norm: float
    d_norm: float


def soft_threshold(u: np.ndarray, kappa: float) -> np.ndarray:
    """Shrink toward zero by kappa; magnitudes at or below kappa map to 0.0."""
    if kappa < 0:
        raise ValueError("threshold must be nonnegative")
    return np.sign(u) * np.maximum(np.abs(u) - kappa, 0.0)


def z_update(x_new: np.ndarray, y: np.ndarray, rho: float,
             lam: float) -> np.ndarray:
    """Exact minimizer of lam*||z||_1 + (rho/2)||z - (x_new - y/rho)||^2."""
    return soft_threshold(x_new - y / rho, lam / rho)


def y_update(y: np.ndarray, rho: float, x_new: np.ndarray,
             z_new: np.ndarray) -> np.ndarray:
    return y + rho * (z_new - x_new)


def residual_norms(z_prev: np.ndarray, state: IterateState) -> ResidualNorms:
    r_norm = float(np.linalg.norm(state.z - state.x))
    d_norm = state.rho * float(np.linalg.norm(state.z - z_prev))
    return ResidualNorms(r_norm=r_norm, d_norm=d_norm)


def stopping_check(r_norm: float, d_norm: float, x: np.ndarray, z: np.ndarray,
                   y: np.ndarray, tol: float) -> bool:
    """Relative primal/dual residual test.

    The dual comparator is floored at 1 so a dual vector near zero (e.g.
    the all-cash start) cannot demand an absolute-zero residual.
    """
    r_ok = r_norm <= tol * max(float(np.linalg.norm(x)), float(np.linalg.norm(z)))
    d_ok = d_norm <= tol * max(float(np.linalg.norm(y)), 1.0)
    return r_ok and d_ok


def feasible_start(problem: PortfolioProblem) -> np.ndarray:
    """Minimum-norm solution of Dx = b; both constraints hold exactly."""
    D, b = problem.D, problem.b
    return D.T @ np.linalg.solve(D @ D.T, b)


def solve(problem: PortfolioProblem, cfg: SolverConfig,
          callback: Optional[Callable[[IterateState], None]] = None) -> SolveResult:
    """Run ADMM to the residual tolerance, the iteration cap, or a breakdown.

    Hitting max_iter is reported in the result, not raised.  In adaptive
    lambda mode, convergence is not declared on an iteration whose guard
    just moved lambda: the optimality target shifted, so the loop continues
    against the new weight.
    """
    pen_cfg = cfg.penalty
    schedule = cfg.lambda_schedule
    lam = schedule.lambda_current
    rho = pen_cfg.rho0
    b = problem.b
    x = feasible_start(problem)
    z = x.copy()
    y = np.zeros(problem.n)
    factorization = factorize(problem, rho)
    pen_state = PenaltyState(pen_cfg)
    spectral = pen_cfg.kind in ("bb", "rbb")
    history = SolveHistory() if cfg.record_history else None
    state = IterateState(x=x, z=z, y=y, rho=rho, lam=lam, k=-1)
    r_norm, d_norm = np.inf, np.inf
    termination = TERMINATION_MAX_ITER
    iterations = cfg.max_iter

    for k in range(cfg.max_iter):
        z_old, y_old = z, y
        x_new = solve_x_update(factorization, z, y, rho, b)
        z_new = z_update(x_new, y, rho, lam)
        y_new = y_update(y, rho, x_new, z_new)
        if not (np.isfinite(x_new).all() and np.isfinite(z_new).all()
                and np.isfinite(y_new).all()):
            termination = TERMINATION_NUMERICAL
            iterations = k
            break
        x, z, y = x_new, z_new, y_new
        state = IterateState(x=x, z=z, y=y, rho=rho, lam=lam, k=k)
        r_norm, d_norm = residual_norms(z_old, state)

        lambda_moved = False
        if schedule.mode == "adaptive":
            basis = z if cfg.shorts_from_z else x
            shorts = count_short_positions(Portfolio(basis, cfg.zero_tol))
            adjusted = maybe_adjust(schedule, shorts)
            lambda_moved = adjusted.lambda_current != schedule.lambda_current
            schedule = adjusted
            lam = schedule.lambda_current

        if history is not None:
            history.r_norm.append(r_norm)
            history.d_norm.append(d_norm)
            history.rho.append(rho)
            history.lam.append(lam)
            history.objective.append(objective_value(problem.C, z, lam))
            history.feasibility.append(float(np.abs(problem.D @ x - b).max()))
        if callback is not None:
            callback(state)

        if not lambda_moved and stopping_check(r_norm, d_norm, x, z, y, cfg.tol):
            termination = TERMINATION_CONVERGED
            iterations = k + 1
            break

        if k % pen_cfg.nbar == 1 % pen_cfg.nbar and k <= pen_cfg.freeze_after:
            ybar = compute_ybar(y_old, rho, x, z_old) if spectral else None
            snapshot = SpectralSnapshot(x=x, z=z, y=y, ybar=ybar,
                                        r_norm=r_norm, d_norm=d_norm, rho=rho)
            rho_new = pen_state.update(snapshot)
            if rho_new != rho:
                rho = rho_new
                factorization = factorize(problem, rho)

    weights = Portfolio(weights=x, zero_tol=cfg.zero_tol)
    return SolveResult(
        weights=weights,
        objective=objective_value(problem.C, x, lam),
        iterations=iterations,
        termination=termination,
        short_count=count_short_positions(weights),
        final_state=state,
        r_norm=float(r_norm),
        d_norm=float(d_norm),
        lambda_initial=cfg.lambda_schedule.lambda_current,
        lambda_final=lam,
        lambda_adjustments=schedule.adjustments_made,
        rho_final=rho,
        consensus_gap=float(np.abs(x - z).max()),
        history=history,
    )
