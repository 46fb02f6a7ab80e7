import numpy as np
import pytest

from sparsereg.datagen import SyntheticSpec, generate
from sparsereg.metrics import (
    RecoveryScore,
    cross_validate_k,
    fold_blocks,
    support_metrics,
)
from sparsereg.oracle import Dataset, ridge_refit
from sparsereg.solver import SolveConfig, solve_cardinality


class TestSupportMetrics:
    def test_textbook_example(self):
        score = support_metrics({1, 2, 4}, {1, 2, 3}, 3)
        assert score.accuracy_pct == pytest.approx(200.0 / 3.0)
        assert score.false_alarm_pct == pytest.approx(100.0 / 3.0)

    def test_perfect_recovery(self):
        assert support_metrics({3, 5}, {3, 5}, 2) == RecoveryScore(100.0, 0.0)

    def test_total_miss(self):
        score = support_metrics({10, 11, 12, 13, 14}, {1, 2, 3}, 3)
        assert score == RecoveryScore(0.0, 100.0)

    def test_empty_selection_convention(self):
        assert support_metrics(set(), {1, 2}, 2) == RecoveryScore(0.0, 0.0)

    def test_complementarity_at_spent_budget(self):
        # |selected| = k_true forces accuracy + false alarm = 100
        rng = np.random.default_rng(0)
        for _ in range(20):
            k = int(rng.integers(1, 8))
            true = set(rng.choice(50, k, replace=False).tolist())
            sel = set(rng.choice(50, k, replace=False).tolist())
            score = support_metrics(sel, true, k)
            assert score.accuracy_pct + score.false_alarm_pct == pytest.approx(100.0)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(1)
        sel = {2, 9, 17}
        true = {2, 4, 17}
        base = support_metrics(sel, true, 3)
        perm = rng.permutation(100)
        mapped = support_metrics({perm[j] for j in sel}, {perm[j] for j in true}, 3)
        assert mapped == base

    def test_equality_iff_perfect_scores(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            k = int(rng.integers(1, 6))
            true = set(rng.choice(20, k, replace=False).tolist())
            sel = set(rng.choice(20, int(rng.integers(1, 6)), replace=False).tolist())
            score = support_metrics(sel, true, k)
            perfect = score.accuracy_pct == 100.0 and score.false_alarm_pct == 0.0
            assert perfect == (sel == true)


class TestFoldBlocks:
    def test_partition(self):
        blocks = fold_blocks(17, 4, seed=0)
        joined = np.sort(np.concatenate(blocks))
        assert np.array_equal(joined, np.arange(17))
        assert len(blocks) == 4

    def test_seed_controls_shuffle(self):
        a = fold_blocks(10, 2, seed=1)
        b = fold_blocks(10, 2, seed=1)
        c = fold_blocks(10, 2, seed=2)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))
        assert any(not np.array_equal(x, y) for x, y in zip(a, c))

    def test_bad_folds_rejected(self):
        with pytest.raises(ValueError):
            fold_blocks(10, 1)
        with pytest.raises(ValueError):
            fold_blocks(10, 11)


class TestCrossValidateK:
    def test_singleton_k_range(self):
        spec = SyntheticSpec(n=24, p=8, k=2, rho=0.0, snr_sqrt=20.0, seed=4)
        inst = generate(spec)
        result = cross_validate_k(inst.dataset, [1.0], [3], folds=3)
        assert result.k_star == 3
        assert result.gamma_star == 1.0
        assert len(result.table) == 1

    def test_leave_one_out_matches_manual_loop(self):
        spec = SyntheticSpec(n=8, p=4, k=1, rho=0.0, snr_sqrt=10.0, seed=5)
        ds = generate(spec).dataset
        gamma, k = 1.0, 1
        result = cross_validate_k(ds, [gamma], [k], folds=8, seed=3)
        cell = result.table[0]
        blocks = fold_blocks(8, 8, seed=3)
        manual = []
        for blk in blocks:
            mask = np.ones(8, dtype=bool)
            mask[blk] = False
            train = Dataset(X=ds.X[mask], Y=ds.Y[mask])
            res = solve_cardinality(train, gamma, k)
            pred = ds.X[blk] @ res.coefficients
            manual.append(float(np.sum((ds.Y[blk] - pred) ** 2)) / len(blk))
        np.testing.assert_allclose(cell.fold_errors, manual, rtol=1e-12)

    def test_recovers_true_sparsity_with_ample_data(self):
        spec = SyntheticSpec(n=80, p=12, k=2, rho=0.0, snr_sqrt=20.0, seed=6)
        inst = generate(spec)
        result = cross_validate_k(
            inst.dataset, [1.0], range(1, 5), folds=4,
            config=SolveConfig(time_limit=20.0),
        )
        assert result.k_star == 2

    def test_tie_breaks_prefer_small_k_then_large_gamma(self):
        # zero response: every cell scores an exact 0, so the tie rules
        # decide alone
        rng = np.random.default_rng(7)
        ds = Dataset(X=rng.standard_normal((12, 5)), Y=np.zeros(12))
        result = cross_validate_k(ds, [0.5, 2.0], [1, 2, 3], folds=3, seed=0)
        assert result.k_star == 1
        assert result.gamma_star == 2.0
