import numpy as np
import pytest
from scipy.linalg import cho_factor, cho_solve

from sparsereg.oracle import (
    Dataset,
    Hyperparams,
    OracleError,
    SupportVector,
    dense_alpha,
    dual_objective,
    enumerate_optimal,
    enumeration_count,
    loss_and_gradient,
    primal_objective,
    relaxed_gradient_dense,
    ridge_loss_dense,
    ridge_refit,
    subset_loss,
)


def random_dataset(rng, n, p):
    return Dataset(X=rng.standard_normal((n, p)), Y=rng.standard_normal(n))


def primal_refit_value(ds, gamma, indices):
    """Independent route: solve the normal equations on the selected
    columns and evaluate the primal objective."""
    if not indices:
        return 0.5 * float(ds.Y @ ds.Y)
    Xs = ds.X[:, list(indices)]
    k = len(indices)
    w = np.linalg.solve(Xs.T @ Xs + np.eye(k) / gamma, Xs.T @ ds.Y)
    resid = ds.Y - Xs @ w
    return 0.5 / gamma * float(w @ w) + 0.5 * float(resid @ resid)


class TestDataset:
    def test_shape_mismatch_rejected(self):
        with pytest.raises(OracleError):
            Dataset(X=np.ones((3, 2)), Y=np.ones(4))

    def test_nonfinite_rejected(self):
        with pytest.raises(OracleError):
            Dataset(X=np.array([[np.nan, 1.0]]), Y=np.ones(1))

    def test_dims(self):
        ds = Dataset(X=np.ones((4, 3)), Y=np.ones(4))
        assert (ds.n, ds.p) == (4, 3)


class TestHyperparams:
    def test_exactly_one_mode(self):
        Hyperparams(gamma=1.0, k=2)
        Hyperparams(gamma=1.0, lambda0=0.5)
        with pytest.raises(OracleError):
            Hyperparams(gamma=1.0)
        with pytest.raises(OracleError):
            Hyperparams(gamma=1.0, k=2, lambda0=0.5)

    def test_gamma_positive(self):
        with pytest.raises(OracleError):
            Hyperparams(gamma=0.0, k=1)


class TestSupportVector:
    def test_sorted_unique_in_range(self):
        s = SupportVector(indices=(0, 3, 5), p=6)
        assert len(s) == 3
        assert s.to_mask().sum() == 3
        with pytest.raises(OracleError):
            SupportVector(indices=(3, 3), p=6)
        with pytest.raises(OracleError):
            SupportVector(indices=(6,), p=6)


class TestRidgeLossDense:
    def test_empty_selection_is_half_y_norm(self):
        rng = np.random.default_rng(0)
        ds = random_dataset(rng, 7, 4)
        val = ridge_loss_dense(ds, 2.5, np.zeros(4))
        assert val == pytest.approx(0.5 * float(ds.Y @ ds.Y), rel=1e-14)

    def test_scalar_case(self):
        ds = Dataset(X=np.array([[1.0]]), Y=np.array([1.0]))
        assert ridge_loss_dense(ds, 1.0, [1.0]) == pytest.approx(0.25, rel=1e-14)

    def test_matches_primal_refit_on_binary_selections(self):
        rng = np.random.default_rng(1)
        ds = random_dataset(rng, 8, 5)
        for gamma in (0.1, 1.0, 10.0):
            for indices in [(0,), (1, 3), (0, 2, 4), (0, 1, 2, 3, 4)]:
                s = np.zeros(5)
                s[list(indices)] = 1.0
                expected = primal_refit_value(ds, gamma, indices)
                assert ridge_loss_dense(ds, gamma, s) == pytest.approx(expected, rel=1e-12)

    def test_rejects_out_of_range_selection(self):
        rng = np.random.default_rng(2)
        ds = random_dataset(rng, 5, 3)
        with pytest.raises(OracleError):
            ridge_loss_dense(ds, 1.0, [0.5, 1.5, 0.0])
        with pytest.raises(OracleError):
            ridge_loss_dense(ds, -1.0, [0.5, 0.5, 0.0])


class TestLossAndGradient:
    def test_scalar_case(self):
        ds = Dataset(X=np.array([[1.0]]), Y=np.array([1.0]))
        ev = loss_and_gradient(ds, 1.0, (0,))
        assert ev.alpha[0] == pytest.approx(0.5, rel=1e-14)
        assert ev.c == pytest.approx(0.25, rel=1e-14)
        assert ev.grad[0] == pytest.approx(-0.125, rel=1e-14)

    def test_empty_support(self):
        rng = np.random.default_rng(3)
        ds = random_dataset(rng, 6, 4)
        ev = loss_and_gradient(ds, 1.0, ())
        assert ev.c == pytest.approx(0.5 * float(ds.Y @ ds.Y), rel=1e-14)
        np.testing.assert_allclose(ev.alpha, ds.Y)
        np.testing.assert_allclose(ev.grad, -0.5 * (ds.X.T @ ds.Y) ** 2, rtol=1e-13)

    def test_vanishing_regularization(self):
        rng = np.random.default_rng(4)
        ds = random_dataset(rng, 10, 5)
        ev = loss_and_gradient(ds, 1e-10, (0, 2))
        assert ev.c == pytest.approx(0.5 * float(ds.Y @ ds.Y), rel=1e-6)
        np.testing.assert_allclose(ev.alpha, ds.Y, rtol=1e-6)

    def test_matches_dense_reference(self):
        rng = np.random.default_rng(5)
        ds = random_dataset(rng, 20, 10)
        support = (1, 4, 8)
        s = np.zeros(10)
        s[list(support)] = 1.0
        for gamma in (0.1, 1.0, 10.0):
            ev = loss_and_gradient(ds, gamma, support)
            c_dense = ridge_loss_dense(ds, gamma, s)
            a_dense = dense_alpha(ds, gamma, s)
            assert abs(ev.c - c_dense) <= 1e-10 * abs(c_dense)
            np.testing.assert_allclose(ev.alpha, a_dense, rtol=1e-10)

    def test_gradient_nonpositive(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            ds = random_dataset(rng, 12, 8)
            support = tuple(np.sort(rng.choice(8, rng.integers(0, 4), replace=False)))
            ev = loss_and_gradient(ds, float(rng.uniform(0.05, 5.0)), support)
            assert np.all(ev.grad <= 0.0)


class TestWoodburyIdentity:
    def test_capacitance_equals_dense_on_random_instances(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            n = int(rng.integers(2, 51))
            p = int(rng.integers(1, 21))
            ds = random_dataset(rng, n, p)
            gamma = float(rng.uniform(0.05, 10.0))
            mask = rng.integers(0, 2, p).astype(bool)
            support = tuple(int(j) for j in np.nonzero(mask)[0])
            c_cap, _ = subset_loss(ds, gamma, support)
            c_dense = ridge_loss_dense(ds, gamma, mask.astype(float))
            assert abs(c_cap - c_dense) <= 1e-10 * max(1.0, abs(c_dense))


class TestDualEquivalence:
    def test_dual_value_reproduces_loss(self):
        rng = np.random.default_rng(8)
        for _ in range(30):
            ds = random_dataset(rng, int(rng.integers(3, 25)), int(rng.integers(1, 12)))
            gamma = float(rng.uniform(0.05, 10.0))
            size = int(rng.integers(0, ds.p + 1))
            support = tuple(np.sort(rng.choice(ds.p, size, replace=False)))
            ev = loss_and_gradient(ds, gamma, support)
            dual = dual_objective(ds, gamma, support, ev.alpha)
            assert abs(dual - ev.c) <= 1e-8 * max(1.0, abs(ev.c))


class TestGradientAgainstFiniteDifferences:
    def test_relaxed_interior_points(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            ds = random_dataset(rng, 10, 6)
            gamma = float(rng.uniform(0.1, 5.0))
            s = rng.uniform(0.1, 0.9, 6)
            analytic = relaxed_gradient_dense(ds, gamma, s)
            # components below 1e-4 of the gradient scale sit inside the
            # central-difference cancellation floor (~eps * c / h), so
            # they are held to that absolute bar instead
            scale = np.abs(analytic).max()
            for j in range(6):
                h = 1e-6 * max(1.0, abs(s[j]))
                sp, sm = s.copy(), s.copy()
                sp[j] += h
                sm[j] -= h
                fd = (ridge_loss_dense(ds, gamma, sp) - ridge_loss_dense(ds, gamma, sm)) / (2 * h)
                assert abs(fd - analytic[j]) <= 1e-4 * max(abs(analytic[j]), 1e-4 * scale)


class TestCutValidity:
    def test_subgradient_inequality(self):
        rng = np.random.default_rng(10)
        for _ in range(200):
            ds = random_dataset(rng, int(rng.integers(3, 20)), int(rng.integers(2, 10)))
            gamma = float(rng.uniform(0.05, 10.0))
            m1 = rng.integers(0, 2, ds.p).astype(float)
            m2 = rng.integers(0, 2, ds.p).astype(float)
            ev = loss_and_gradient(ds, gamma, tuple(np.nonzero(m2)[0]))
            c1, _ = subset_loss(ds, gamma, tuple(np.nonzero(m1)[0]))
            assert c1 >= ev.c + float(ev.grad @ (m1 - m2)) - 1e-9


class TestEnumerateOptimal:
    def test_two_candidates(self):
        ds = Dataset(X=np.array([[2.0], [1.0]]), Y=np.array([1.0, 3.0]))
        s, c = enumerate_optimal(ds, 1.0, 1)
        direct = min(
            (subset_loss(ds, 1.0, idx)[0], idx) for idx in [(), (0,)]
        )
        assert c == direct[0]
        assert s.indices == direct[1]

    def test_full_support_when_budget_allows_orthogonal(self):
        # orthogonal columns, weak regularization: every column helps
        X = np.eye(4)[:, :3]
        Y = np.array([1.0, -2.0, 3.0, 0.5])
        ds = Dataset(X=X, Y=Y)
        s, _ = enumerate_optimal(ds, 100.0, 3)
        assert s.indices == (0, 1, 2)

    def test_matches_direct_loop(self):
        rng = np.random.default_rng(11)
        ds = random_dataset(rng, 15, 10)
        from itertools import combinations

        direct = min(
            (subset_loss(ds, 1.0, idx)[0], idx)
            for size in range(3)
            for idx in combinations(range(10), size)
        )
        s, c = enumerate_optimal(ds, 1.0, 2)
        assert c == pytest.approx(direct[0], rel=1e-12)
        assert s.indices == direct[1]

    def test_budget_monotonicity(self):
        rng = np.random.default_rng(12)
        ds = random_dataset(rng, 12, 7)
        values = [enumerate_optimal(ds, 0.7, k)[1] for k in range(1, 6)]
        assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))

    def test_guard_refuses_explosion(self):
        ds = Dataset(X=np.ones((2, 50)), Y=np.ones(2))
        with pytest.raises(OracleError, match="supports"):
            enumerate_optimal(ds, 1.0, 25)
        assert enumeration_count(3, 2) == 7


class TestRefit:
    def test_refit_primal_matches_loss(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            ds = random_dataset(rng, 15, 8)
            gamma = float(rng.uniform(0.1, 5.0))
            support = tuple(np.sort(rng.choice(8, 3, replace=False)))
            w = ridge_refit(ds, gamma, support)
            assert np.all(w[[j for j in range(8) if j not in support]] == 0.0)
            c, _ = subset_loss(ds, gamma, support)
            assert primal_objective(ds, gamma, w) == pytest.approx(c, rel=1e-10)
