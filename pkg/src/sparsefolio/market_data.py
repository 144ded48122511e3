"""Returns ingestion, moment estimation, and synthetic market generation.

The on-disk format is a plain UTF-8 CSV: a header row of asset names
followed by one row of fractional returns per observation period.  The
same layout is used for both input and generated output, so a file
written by :func:`returns_to_csv` parses back bit-for-bit.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

DEFAULT_JITTER_FLOOR = 1e-10


class ReturnsFormatError(ValueError):
    """A returns CSV violates the expected layout."""


@dataclass(frozen=True)
class ReturnsMatrix:
    """An m x n matrix of per-period returns; rows are periods, columns assets."""

    values: np.ndarray
    asset_names: tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "asset_names", tuple(self.asset_names))
        if values.ndim != 2:
            raise ValueError(f"returns must be a 2-d array, got shape {values.shape}")
        m, n = values.shape
        if m < 2:
            raise ValueError(f"need at least 2 observation periods, got {m}")
        if n < 2:
            raise ValueError(f"need at least 2 assets, got {n}")
        if len(self.asset_names) != n:
            raise ValueError(
                f"{len(self.asset_names)} asset names for {n} return columns"
            )
        if not np.isfinite(values).all():
            raise ValueError("returns contain non-finite entries")

    @property
    def periods(self) -> int:
        return self.values.shape[0]

    @property
    def assets(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class AssetStats:
    """Sample mean vector and (conditioned) covariance of a returns matrix."""

    mu: np.ndarray
    C: np.ndarray
    jitter_applied: float = 0.0

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        C = np.asarray(self.C, dtype=float)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "C", C)
        n = mu.shape[0]
        if C.shape != (n, n):
            raise ValueError(f"covariance shape {C.shape} does not match {n} assets")
        if self.jitter_applied < 0:
            raise ValueError("jitter_applied must be nonnegative")
        if np.abs(C - C.T).max() > 1e-12:
            raise ValueError("covariance is not symmetric")
        try:
            np.linalg.cholesky(C)
        except np.linalg.LinAlgError:
            raise ValueError("covariance is not positive definite") from None


def load_returns_csv(path) -> ReturnsMatrix:
    """Parse a returns CSV with a header of asset names.

    Raises ReturnsFormatError with the offending line (and column, for bad
    numbers) on any layout problem; missing files surface as the usual
    FileNotFoundError.
    """
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    if not rows:
        raise ReturnsFormatError(f"{path}: line 1: empty file, expected a header row")
    names = [name.strip() for name in rows[0]]
    n = len(names)
    if n < 2:
        raise ReturnsFormatError(
            f"{path}: line 1: header names {n} asset column(s), need at least 2"
        )
    data = []
    for offset, row in enumerate(rows[1:], start=2):
        if len(row) != n:
            raise ReturnsFormatError(
                f"{path}: line {offset}: expected {n} fields, got {len(row)}"
            )
        parsed = []
        for col, token in enumerate(row):
            try:
                parsed.append(float(token))
            except ValueError:
                raise ReturnsFormatError(
                    f"{path}: line {offset}, column {col + 1} ({names[col]}): "
                    f"not a number: {token!r}"
                ) from None
        data.append(parsed)
    if len(data) < 2:
        raise ReturnsFormatError(
            f"{path}: need at least 2 data rows, got {len(data)}"
        )
    return ReturnsMatrix(np.array(data, dtype=float), tuple(names))


def returns_to_csv(returns: ReturnsMatrix) -> str:
    """Serialize to the CSV layout accepted by load_returns_csv.

    Floats are written with repr so a round trip reproduces values exactly.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(returns.asset_names)
    for row in returns.values:
        writer.writerow([repr(float(v)) for v in row])
    return buffer.getvalue()


def write_returns_csv(returns: ReturnsMatrix, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        handle.write(returns_to_csv(returns))


def estimate_stats(returns: ReturnsMatrix,
                   jitter_floor: float = DEFAULT_JITTER_FLOOR) -> AssetStats:
    """Column means and the unbiased (1/(m-1)) sample covariance.

    If the smallest covariance eigenvalue does not clear ``jitter_floor``,
    a diagonal shift of (2*jitter_floor - lambda_min) is added so the
    result is safely positive definite; the shift is reported in
    ``jitter_applied``.
    """
    if jitter_floor < 0:
        raise ValueError("jitter_floor must be nonnegative")
    values = returns.values
    mu = values.mean(axis=0)
    C = np.cov(values, rowvar=False, ddof=1)
    C = 0.5 * (C + C.T)
    smallest = float(np.linalg.eigvalsh(C)[0])
    jitter = 0.0
    if smallest <= jitter_floor:
        jitter = jitter_floor - smallest + jitter_floor
        C = C + jitter * np.eye(returns.assets)
    return AssetStats(mu=mu, C=C, jitter_applied=jitter)


def generate_synthetic_returns(n: int, m: int, seed: int,
                               factor_count: int = 3,
                               noise_scale: float = 0.01) -> ReturnsMatrix:
    """Deterministic factor-model returns with per-asset means in [0, 0.02].

    Returns are mean + centered(loadings @ factors + noise), so the sample
    column means equal the drawn means exactly.  Lowering ``noise_scale``
    or ``factor_count`` drives the sample covariance toward singularity,
    which is useful for conditioning experiments.
    """
    if n < 2:
        raise ValueError(f"need at least 2 assets, got {n}")
    if m < 2:
        raise ValueError(f"need at least 2 periods, got {m}")
    if factor_count < 1:
        raise ValueError(f"need at least 1 factor, got {factor_count}")
    if noise_scale < 0:
        raise ValueError("noise_scale must be nonnegative")
    rng = np.random.default_rng(seed)
    means = rng.uniform(0.002, 0.018, size=n)
    loadings = rng.normal(0.0, 0.02, size=(n, factor_count))
    factors = rng.standard_normal((m, factor_count))
    noise = rng.normal(0.0, noise_scale, size=(m, n)) if noise_scale > 0 else 0.0
    stochastic = factors @ loadings.T + noise
    stochastic = stochastic - stochastic.mean(axis=0)
    names = tuple(f"A{i + 1}" for i in range(n))
    return ReturnsMatrix(means + stochastic, names)
