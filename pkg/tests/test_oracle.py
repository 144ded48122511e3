import numpy as np
import pytest

from conftest import factor_problem, identity_problem, two_asset_problem
from sparsefolio.market_data import AssetStats
from sparsefolio.model import PortfolioProblem, build_problem, objective_value
from sparsefolio.oracle import (
    InfeasibleTargetError,
    SignPattern,
    check_kkt,
    enumerate_solve,
    iter_sign_patterns,
)


def degenerate_problem(n=3):
    # identical constraint rows defeat every support system
    mu = np.ones(n)
    return PortfolioProblem(C=np.eye(n), mu=mu, e=1.0,
                            D=np.vstack([mu, np.ones(n)]),
                            b=np.array([1.0, 1.0]), n=n)


class TestSignPattern:
    def test_coerces_to_ints(self):
        pattern = SignPattern((1.0, -1.0, 0.0))
        assert pattern.signs == (1, -1, 0)

    def test_rejects_other_values(self):
        with pytest.raises(ValueError, match="-1, 0, or 1"):
            SignPattern((1, 2, 0))

    def test_rejects_single_nonzero(self):
        with pytest.raises(ValueError, match="at least 2"):
            SignPattern((0, 1, 0))


class TestIterSignPatterns:
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_count_excludes_underdetermined(self, n):
        # all 3^n patterns minus the all-zero one and the 2n singletons
        patterns = list(iter_sign_patterns(n))
        assert len(patterns) == 3 ** n - 1 - 2 * n

    def test_lexicographic_order(self):
        head = [p.signs for p in iter_sign_patterns(3)][:4]
        assert head == [(-1, -1, -1), (-1, -1, 0), (-1, -1, 1), (-1, 0, -1)]

    def test_every_pattern_supports_two_constraints(self):
        for pattern in iter_sign_patterns(4):
            assert sum(1 for s in pattern.signs if s != 0) >= 2


class TestCheckKkt:
    def test_exact_optimum_scores_zero(self):
        problem = identity_problem(mu=(0.1, 0.2, 0.3), e=0.2)
        x = np.ones(3) / 3
        # stationarity: x + D'nu = 0 has the symmetric solution below
        nu = np.linalg.lstsq(problem.D.T, -x, rcond=None)[0]
        assert check_kkt(problem, 0.0, x, nu, np.zeros(3)) <= 1e-12

    def test_budget_violation_is_reported(self):
        problem = identity_problem(mu=(0.1, 0.2, 0.3), e=0.2)
        x = np.array([0.5, 0.5, 0.5])
        assert check_kkt(problem, 0.0, x, np.zeros(2), np.zeros(3)) >= 0.5

    def test_off_support_subgradient_overflow_counts(self):
        problem = two_asset_problem()
        res = enumerate_solve(problem, 0.01)
        bad_g = res.subgradient.copy()
        bad_g[0] = 3.0
        # asset 0 is on the support here, so g must equal its sign
        assert res.weights[0] != 0
        assert check_kkt(problem, 0.01, res.weights, res.multiplier, bad_g) >= 1.9


class TestUnpenalized:
    def test_matches_direct_equality_qp(self):
        problem = factor_problem(n=6, seed=11)
        res = enumerate_solve(problem, 0.0)
        n = problem.n
        K = np.zeros((n + 2, n + 2))
        K[:n, :n] = problem.C
        K[:n, n:] = problem.D.T
        K[n:, :n] = problem.D
        expected = np.linalg.solve(K, np.concatenate([np.zeros(n), problem.b]))
        np.testing.assert_allclose(res.weights, expected[:n], atol=1e-12)
        np.testing.assert_allclose(res.multiplier, expected[n:], atol=1e-12)
        assert res.unique
        np.testing.assert_array_equal(res.subgradient, np.zeros(n))

    def test_degenerate_constraints_refused(self):
        with pytest.raises(InfeasibleTargetError, match="unattainable"):
            enumerate_solve(degenerate_problem(), 0.0)


class TestEnumerateSolve:
    @pytest.mark.parametrize("lam", [0.0, 0.005, 0.1, 2.0])
    def test_two_assets_pinned_by_constraints(self, lam):
        res = enumerate_solve(two_asset_problem(e=0.15), lam)
        np.testing.assert_allclose(res.weights, [0.5, 0.5], atol=1e-12)

    @pytest.mark.parametrize("lam", [0.0, 0.01, 1.0])
    def test_symmetric_case(self, lam):
        res = enumerate_solve(identity_problem(mu=(0.1, 0.2, 0.3), e=0.2), lam)
        np.testing.assert_allclose(res.weights, np.ones(3) / 3, atol=1e-12)

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_certificate_holds_on_random_instances(self, seed):
        problem = factor_problem(n=6, seed=seed, noise_scale=0.03)
        lam = 0.01 / 60
        res = enumerate_solve(problem, lam)
        assert check_kkt(problem, lam, res.weights, res.multiplier,
                         res.subgradient) <= 1e-9
        on = res.weights != 0
        np.testing.assert_array_equal(res.subgradient[on],
                                      np.sign(res.weights[on]))
        assert np.abs(res.subgradient).max() <= 1.0 + 1e-9
        expected_obj = objective_value(problem.C, res.weights, lam)
        assert res.objective == pytest.approx(expected_obj, abs=1e-15)

    def test_objective_dominates_feasible_competitors(self, rng):
        problem = factor_problem(n=5, seed=9, noise_scale=0.03)
        lam = 0.002
        res = enumerate_solve(problem, lam)
        # project random vectors onto the constraints and compare objectives
        D, b = problem.D, problem.b
        P = np.eye(5) - D.T @ np.linalg.solve(D @ D.T, D)
        x_part = D.T @ np.linalg.solve(D @ D.T, b)
        for _ in range(200):
            x = x_part + P @ rng.standard_normal(5)
            assert objective_value(problem.C, x, lam) >= res.objective - 1e-12

    def test_negative_lambda_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            enumerate_solve(two_asset_problem(), -0.1)

    def test_large_problems_refused(self):
        stats = AssetStats(mu=np.linspace(0.01, 0.02, 13), C=np.eye(13))
        problem = build_problem(stats, 0.015)
        with pytest.raises(ValueError, match="capped"):
            enumerate_solve(problem, 0.01)

    def test_degenerate_constraints_refused(self):
        with pytest.raises(InfeasibleTargetError, match="unattainable"):
            enumerate_solve(degenerate_problem(), 0.01)


class TestUniqueness:
    MU = np.array([0.05, 0.10, 0.20])
    C = np.array([[0.06, 0.01, 0.00],
                  [0.01, 0.05, 0.01],
                  [0.00, 0.01, 0.09]])
    LAM = 0.004

    def _solve(self, e):
        stats = AssetStats(mu=self.MU, C=self.C)
        problem = build_problem(stats, e, allow_out_of_range=True)
        return enumerate_solve(problem, self.LAM)

    def test_generic_target_is_unique(self):
        assert self._solve(0.12).unique

    def test_tie_at_support_boundary(self):
        # asset 0 leaves the support as the target return rises; bisect to
        # the boundary, where the two adjacent supports verify with equal
        # objectives and uniqueness can no longer be claimed
        lo, hi = 0.165, 0.170
        assert self._solve(lo).weights[0] > 0
        assert self._solve(hi).weights[0] == 0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if self._solve(mid).weights[0] > 0:
                lo = mid
            else:
                hi = mid
        res = self._solve(lo)
        assert 0 < res.weights[0] < 1e-9
        assert not res.unique


class TestPerturbationSeparation:
    def test_single_weight_bump_breaks_certificate(self):
        problem = factor_problem(n=6, seed=14, noise_scale=0.03)
        lam = 0.002
        res = enumerate_solve(problem, lam)
        for j in range(problem.n):
            bumped = res.weights.copy()
            bumped[j] += 0.1
            violation = check_kkt(problem, lam, bumped, res.multiplier,
                                  res.subgradient)
            assert violation >= 0.01
