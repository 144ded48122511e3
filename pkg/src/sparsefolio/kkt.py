"""Direct factorization of the equality-constrained quadratic x-step.

Each ADMM x-step minimizes (1/2) x'Cx + (rho/2)||x - v||^2 subject to
Dx = b, whose optimality system is the symmetric indefinite block matrix

    [ C + rho*I   D' ] [x ]   [ rho*z + y ]
    [ D           0  ] [nu] = [ b         ]

We factor the full (n+2) x (n+2) block once per rho with partial-pivot LU
and reuse it for every solve at that rho; a Schur-complement route would
be marginally cheaper but needlessly splits the accuracy story.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from .model import PortfolioProblem


@dataclass(frozen=True)
class KktFactorization:
    """LU factors of the block system, valid only for the rho they were built at."""

    rho: float
    n: int
    lu: tuple = field(repr=False)


def factorize(problem: PortfolioProblem, rho: float) -> KktFactorization:
    """Assemble and factor the block matrix for a given penalty value.

    Parameters
    ----------
    problem : PortfolioProblem
    rho : float
        Positive penalty parameter; appears only on the diagonal block.

    Raises
    ------
    numpy.linalg.LinAlgError
        If the block matrix is singular, which with a positive definite C
        only happens when the constraint rows are linearly dependent.
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    n = problem.n
    # With C positive definite the block matrix is singular exactly when D
    # loses rank, so test D directly instead of guessing from LU pivots
    # (pivot magnitudes are a poor singularity proxy at extreme rho).
    spectrum = np.linalg.svd(problem.D, compute_uv=False)
    if spectrum[1] <= 1e-12 * spectrum[0]:
        raise np.linalg.LinAlgError(
            "singular x-step system: constraint rows are linearly dependent"
        )
    K = np.zeros((n + 2, n + 2))
    K[:n, :n] = problem.C + rho * np.eye(n)
    K[:n, n:] = problem.D.T
    K[n:, :n] = problem.D
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        factors = lu_factor(K)
    return KktFactorization(rho=float(rho), n=n, lu=factors)


def solve_with_multiplier(factorization: KktFactorization, z: np.ndarray,
                          y: np.ndarray, rho: float,
                          b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Solve the block system, returning both x and the constraint multiplier.

    The multiplier is diagnostic only; the ADMM loop consumes just x.
    """
    if rho != factorization.rho:
        raise ValueError(
            f"factorization was built for rho={factorization.rho}, got rho={rho}"
        )
    n = factorization.n
    rhs = np.concatenate([rho * z + y, b])
    solution = lu_solve(factorization.lu, rhs)
    return solution[:n], solution[n:]


def solve_x_update(factorization: KktFactorization, z: np.ndarray, y: np.ndarray,
                   rho: float, b: np.ndarray) -> np.ndarray:
    """The x-step: exactly feasible (Dx = b) minimizer for the current (z, y)."""
    x, _ = solve_with_multiplier(factorization, z, y, rho, b)
    return x
