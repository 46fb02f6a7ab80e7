import numpy as np
import pytest

from sparsereg.oracle import Dataset, enumerate_optimal, ridge_loss_dense
from sparsereg.warmstart import (
    relaxation_objective,
    solve_dual_relaxation,
    warm_start_support,
)


def random_dataset(rng, n, p):
    return Dataset(X=rng.standard_normal((n, p)), Y=rng.standard_normal(n))


class TestRelaxationBound:
    def test_vanishing_regularization(self):
        rng = np.random.default_rng(0)
        ds = random_dataset(rng, 10, 6)
        rr = solve_dual_relaxation(ds, 1e-12, 2, iters=200)
        assert rr.lower_bound == pytest.approx(0.5 * float(ds.Y @ ds.Y), rel=1e-6)

    def test_full_budget_matches_dense_ridge(self):
        rng = np.random.default_rng(1)
        for gamma in (0.1, 1.0, 10.0):
            ds = random_dataset(rng, 12, 7)
            full = ridge_loss_dense(ds, gamma, np.ones(7))
            rr = solve_dual_relaxation(ds, gamma, 7, iters=5000)
            assert abs(rr.lower_bound - full) <= 1e-4 * (1.0 + abs(full))

    def test_weak_duality_on_random_instances(self):
        rng = np.random.default_rng(2)
        for _ in range(25):
            ds = random_dataset(rng, 10, 6)
            gamma = float(rng.uniform(0.05, 10.0))
            k = int(rng.integers(1, 4))
            _, opt = enumerate_optimal(ds, gamma, k)
            rr = solve_dual_relaxation(ds, gamma, k, iters=300)
            assert rr.lower_bound <= opt + 1e-9

    def test_every_iterate_valid_even_one_iteration(self):
        rng = np.random.default_rng(3)
        ds = random_dataset(rng, 8, 5)
        _, opt = enumerate_optimal(ds, 2.0, 2)
        rr = solve_dual_relaxation(ds, 2.0, 2, iters=1, polish_every=0)
        assert rr.lower_bound <= opt + 1e-9


class TestConcavity:
    def test_objective_concave_along_segments(self):
        rng = np.random.default_rng(4)
        ds = random_dataset(rng, 9, 7)
        for _ in range(50):
            gamma = float(rng.uniform(0.1, 5.0))
            k = int(rng.integers(1, 7))
            a1 = rng.standard_normal(9)
            a2 = rng.standard_normal(9)
            theta = float(rng.uniform(0, 1))
            mix = relaxation_objective(ds, gamma, k, theta * a1 + (1 - theta) * a2)
            sep = theta * relaxation_objective(ds, gamma, k, a1) + (
                1 - theta
            ) * relaxation_objective(ds, gamma, k, a2)
            assert mix >= sep - 1e-9


class TestWarmStartSupport:
    def test_full_budget_selects_everything(self):
        rng = np.random.default_rng(5)
        ds = random_dataset(rng, 6, 4)
        s = warm_start_support(rng.standard_normal(6), ds, 4)
        assert s.indices == (0, 1, 2, 3)

    def test_single_informative_column(self):
        # alpha orthogonal to all but one column: that column leads,
        # the rest fill in by the lowest-index tie rule
        X = np.zeros((4, 5))
        X[:, 2] = [1.0, 0.0, 0.0, 0.0]
        ds = Dataset(X=X, Y=np.ones(4))
        alpha = np.array([1.0, 0.0, 0.0, 0.0])
        s = warm_start_support(alpha, ds, 3)
        assert 2 in s.indices
        assert s.indices == (0, 1, 2)

    def test_matches_direct_sort(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            ds = random_dataset(rng, 8, 10)
            alpha = rng.standard_normal(8)
            k = int(rng.integers(1, 10))
            scores = (ds.X.T @ alpha) ** 2
            expected = tuple(sorted(np.argsort(-scores, kind="stable")[:k]))
            assert warm_start_support(alpha, ds, k).indices == expected

    def test_scale_invariance(self):
        rng = np.random.default_rng(7)
        ds = random_dataset(rng, 7, 9)
        alpha = rng.standard_normal(7)
        base = warm_start_support(alpha, ds, 4).indices
        for c in (-3.0, 0.5, 100.0):
            assert warm_start_support(c * alpha, ds, 4).indices == base
