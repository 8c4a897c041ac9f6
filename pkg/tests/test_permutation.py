import numpy as np
import pytest

from permsel.dataset import RowView, Task
from permsel.errors import PermselError
from permsel.learner import LearnerSpec, fit
from permsel.metrics import Metric, accuracy
from permsel.permutation import (
    EvalContext,
    FeatureScores,
    merit,
    merit_mc,
    pfi_rank,
    select_top_k,
)

from conftest import StubModel


@pytest.fixture
def stump_ctx(stump_rows, stump_model):
    return EvalContext(stump_model, stump_rows, Metric.ACC)


class TestEvalContext:
    def test_baseline_cached_equals_recomputed(self, stump_ctx):
        assert stump_ctx.baseline_perf == 1.0
        assert stump_ctx.baseline_perf == stump_ctx._evaluate(stump_ctx.eval_rows.X)

    def test_width_mismatch(self, stump_rows):
        wide_model = StubModel(lambda r: 0, n_features=3)
        with pytest.raises(PermselError):
            EvalContext(wide_model, stump_rows, Metric.ACC)

    def test_nrmse_rejected(self, stump_rows, stump_model):
        with pytest.raises(PermselError):
            EvalContext(stump_model, stump_rows, Metric.NRMSE)


class TestMerit:
    def test_empty_selection_is_zero(self, stump_ctx):
        assert merit(stump_ctx, np.zeros(1, dtype=np.uint8),
                     np.random.default_rng(0)) == 0.0

    def test_constant_model_is_zero(self, stump_rows):
        model = StubModel(lambda r: 1, n_features=1)
        ctx = EvalContext(model, stump_rows, Metric.ACC)
        for seed in range(10):
            assert merit(ctx, np.ones(1, dtype=np.uint8),
                         np.random.default_rng(seed)) == 0.0

    def test_seeded_golden_single_feature(self, stump_rows, stump_model, stump_ctx):
        # score the recorded permutation by hand and compare
        rng = np.random.default_rng(7)
        permuted = np.random.default_rng(7).permutation(stump_rows.X[:, 0])
        hand_preds = (permuted > 1.5).astype(int)
        expected = abs(1.0 - accuracy(stump_rows.y, hand_preds))
        got = merit(stump_ctx, np.ones(1, dtype=np.uint8), rng)
        assert got == pytest.approx(expected, abs=1e-15)

    def test_nonnegative_on_random_fixtures(self, small_regression, tiny_learner):
        ds = small_regression
        rows = ds.rows(np.arange(ds.n_rows))
        model = fit(tiny_learner, rows)
        ctx = EvalContext(model, rows, Metric.RMSE)
        rng = np.random.default_rng(1)
        for _ in range(30):
            bits = (rng.random(ds.n_features) < 0.4).astype(np.uint8)
            assert merit(ctx, bits, rng) >= 0.0

    def test_source_rows_unmodified(self, small_regression, tiny_learner):
        ds = small_regression
        rows = ds.rows(np.arange(ds.n_rows))
        snapshot = rows.X.copy()
        model = fit(tiny_learner, rows)
        ctx = EvalContext(model, rows, Metric.RMSE)
        merit(ctx, np.ones(ds.n_features, dtype=np.uint8), np.random.default_rng(2))
        assert np.array_equal(rows.X, snapshot)

    def test_width_mismatch(self, stump_ctx):
        with pytest.raises(PermselError):
            merit(stump_ctx, np.ones(2, dtype=np.uint8), np.random.default_rng(0))

    def test_deterministic_given_stream(self, small_regression, tiny_learner):
        ds = small_regression
        rows = ds.rows(np.arange(ds.n_rows))
        model = fit(tiny_learner, rows)
        ctx = EvalContext(model, rows, Metric.RMSE)
        bits = np.ones(ds.n_features, dtype=np.uint8)
        a = merit(ctx, bits, np.random.default_rng(42))
        b = merit(ctx, bits, np.random.default_rng(42))
        assert a == b

    def test_null_features_exactly_zero_when_model_ignores_them(self):
        # the model only looks at feature 0, so shuffling the rest is a no-op
        rng = np.random.default_rng(3)
        X = rng.standard_normal((100, 5))
        y = (X[:, 0] > 0).astype(np.int64)
        rows = RowView(X, y, Task.CLASSIFICATION, class_count=2)
        model = StubModel(lambda r: int(r[0] > 0), n_features=5)
        ctx = EvalContext(model, rows, Metric.ACC)
        for seed in range(20):
            bits = np.zeros(5, dtype=np.uint8)
            bits[1 + seed % 4] = 1
            bits[1 + (seed + 1) % 4] = 1
            assert merit(ctx, bits, np.random.default_rng(seed)) == 0.0

    def test_null_features_near_zero_with_forest(self):
        # forest trained where only feature 0 carries signal: the mean
        # merit of pure-noise subsets stays below 0.02
        rng = np.random.default_rng(4)
        X = rng.standard_normal((200, 5))
        y = (X[:, 0] > 0).astype(np.int64)
        rows = RowView(X, y, Task.CLASSIFICATION, class_count=2)
        model = fit(LearnerSpec(n_trees=20, max_features="all", seed=0), rows)
        ctx = EvalContext(model, rows, Metric.ACC)
        values = []
        for seed in range(50):
            bits = np.array([0, 1, 1, 1, 1], dtype=np.uint8)
            values.append(merit(ctx, bits, np.random.default_rng(seed)))
        assert np.mean(values) < 0.02


class TestMeritMc:
    def test_repeats_one_matches_merit(self, stump_ctx):
        bits = np.ones(1, dtype=np.uint8)
        a = merit_mc(stump_ctx, bits, 1, np.random.default_rng(5))
        b = merit(stump_ctx, bits, np.random.default_rng(5))
        assert a == b

    def test_zero_selection_any_repeats(self, stump_ctx):
        assert merit_mc(stump_ctx, np.zeros(1, dtype=np.uint8), 7,
                        np.random.default_rng(0)) == 0.0

    def test_zero_repeats_rejected(self, stump_ctx):
        with pytest.raises(PermselError):
            merit_mc(stump_ctx, np.ones(1, dtype=np.uint8), 0,
                     np.random.default_rng(0))

    def test_variance_shrinks_with_repeats(self, stump_ctx):
        bits = np.ones(1, dtype=np.uint8)
        singles = [merit_mc(stump_ctx, bits, 1, np.random.default_rng(1000 + t))
                   for t in range(100)]
        fives = [merit_mc(stump_ctx, bits, 5, np.random.default_rng(2000 + t))
                 for t in range(100)]
        assert np.var(fives) < np.var(singles)


class TestPfiRank:
    def test_constant_column_scores_zero(self):
        X = np.column_stack([np.arange(6.0), np.full(6, 2.0)])
        y = (X[:, 0] > 2.5).astype(np.int64)
        rows = RowView(X, y, Task.CLASSIFICATION, class_count=2)
        model = StubModel(lambda r: int(r[0] > 2.5), n_features=2)
        scores = pfi_rank(EvalContext(model, rows, Metric.ACC), repeats=3,
                          rng=np.random.default_rng(0))
        assert scores.scores[1] == 0.0

    def test_ignored_feature_scores_zero_and_used_feature_positive(self):
        rng = np.random.default_rng(6)
        X = rng.standard_normal((40, 2))
        y = (X[:, 0] > 0).astype(np.int64)
        rows = RowView(X, y, Task.CLASSIFICATION, class_count=2)
        model = StubModel(lambda r: int(r[0] > 0), n_features=2)
        scores = pfi_rank(EvalContext(model, rows, Metric.ACC), repeats=5,
                          rng=np.random.default_rng(1))
        assert scores.scores[1] == 0.0
        assert scores.scores[0] > 0.0
        assert scores.ranking[0] == 0

    def test_never_mutates_eval_rows(self, small_regression, tiny_learner):
        ds = small_regression
        rows = ds.rows(np.arange(ds.n_rows))
        before_x = rows.X.copy()
        before_y = rows.y.copy()
        model = fit(tiny_learner, rows)
        pfi_rank(EvalContext(model, rows, Metric.RMSE), repeats=2,
                 rng=np.random.default_rng(2))
        assert np.array_equal(rows.X, before_x)
        assert np.array_equal(rows.y, before_y)

    def test_zero_repeats_rejected(self, stump_ctx):
        with pytest.raises(PermselError):
            pfi_rank(stump_ctx, repeats=0)

    def test_singleton_merit_converges_to_pfi_score(self, small_classification):
        ds = small_classification
        rows = ds.rows(np.arange(ds.n_rows))
        model = fit(LearnerSpec(n_trees=10, seed=0), rows)
        ctx = EvalContext(model, rows, Metric.ACC)
        bits = np.zeros(ds.n_features, dtype=np.uint8)
        bits[0] = 1
        mc = merit_mc(ctx, bits, 200, np.random.default_rng(3))
        scores = pfi_rank(ctx, repeats=200, rng=np.random.default_rng(4))
        assert mc == pytest.approx(scores.scores[0], abs=0.02)


class TestSelectTopK:
    def test_k_equals_w(self):
        scores = FeatureScores(np.array([0.1, 0.5, 0.3]))
        assert select_top_k(scores, 3).tolist() == [0, 1, 2]

    def test_k_one_is_argmax(self):
        scores = FeatureScores(np.array([0.1, 0.5, 0.3]))
        assert select_top_k(scores, 1).tolist() == [1]

    def test_tie_prefers_lower_index(self):
        scores = FeatureScores(np.array([0.3, 0.9, 0.9]))
        assert select_top_k(scores, 2).tolist() == [1, 2]
        assert select_top_k(scores, 1).tolist() == [1]

    def test_k_out_of_range(self):
        scores = FeatureScores(np.array([0.3, 0.9]))
        with pytest.raises(PermselError):
            select_top_k(scores, 0)
        with pytest.raises(PermselError):
            select_top_k(scores, 3)

    def test_ranking_is_descending_with_index_ties(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            vals = rng.integers(0, 4, size=10).astype(float)
            fs = FeatureScores(vals)
            ranked = fs.scores[fs.ranking]
            assert np.all(np.diff(ranked) <= 0)
            for a, b in zip(fs.ranking[:-1], fs.ranking[1:]):
                if fs.scores[a] == fs.scores[b]:
                    assert a < b
