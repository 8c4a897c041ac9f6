import numpy as np
import pytest

from permsel.dataset import RowView, Task
from permsel.errors import LearnerError
from permsel.learner import LearnerSpec, RandomForestModel, fit
from permsel.tree import Tree


def _leaf_tree(value):
    return Tree([-1], [0.0], [-1], [-1], [value])


def _cls_rows(X, y, q=2):
    return RowView(np.asarray(X, dtype=float), np.asarray(y), Task.CLASSIFICATION,
                   class_count=q)


def _reg_rows(X, y):
    return RowView(np.asarray(X, dtype=float), np.asarray(y, dtype=float),
                   Task.REGRESSION)


class TestFit:
    def test_constant_target_predicts_constant(self):
        rows = _cls_rows([[0.0], [1.0], [2.0]], [1, 1, 1], q=2)
        model = fit(LearnerSpec(n_trees=3, seed=0), rows)
        grid = np.linspace(-5, 5, 11).reshape(-1, 1)
        assert np.all(model.predict(grid) == 1)

    def test_constant_regression_target(self):
        rows = _reg_rows([[0.0], [1.0], [2.0]], [4.5, 4.5, 4.5])
        model = fit(LearnerSpec(n_trees=2, seed=1), rows)
        assert np.allclose(model.predict([[0.7], [99.0]]), 4.5)

    def test_two_rows_pure_fit(self):
        rows = _cls_rows([[0.0, 1.0], [1.0, 0.0]], [0, 1])
        model = fit(LearnerSpec(n_trees=1, bootstrap=False, max_features="all",
                                seed=0), rows)
        assert model.predict(rows.X).tolist() == [0, 1]

    def test_deterministic_predictions(self, small_classification):
        ds = small_classification
        rows = ds.rows(np.arange(ds.n_rows))
        spec = LearnerSpec(n_trees=7, seed=11)
        m1 = fit(spec, rows)
        m2 = fit(spec, rows)
        assert np.array_equal(m1.predict(rows.X), m2.predict(rows.X))

    def test_seed_changes_forest(self, small_classification):
        ds = small_classification
        rows = ds.rows(np.arange(ds.n_rows))
        m1 = fit(LearnerSpec(n_trees=5, seed=0), rows)
        m2 = fit(LearnerSpec(n_trees=5, seed=1), rows)
        trees_differ = any(
            not np.array_equal(a.threshold, b.threshold)
            for a, b in zip(m1.trees, m2.trees))
        assert trees_differ

    def test_empty_training_set(self):
        rows = _reg_rows(np.zeros((0, 2)), np.zeros(0))
        with pytest.raises(LearnerError):
            fit(LearnerSpec(n_trees=1), rows)

    def test_degenerate_spec(self):
        rows = _reg_rows([[1.0], [2.0]], [1.0, 2.0])
        with pytest.raises(LearnerError):
            fit(LearnerSpec(n_trees=0), rows)
        with pytest.raises(LearnerError):
            fit(LearnerSpec(n_trees=1, max_features=5), rows)

    def test_capacity_no_contradictions(self):
        # depth-unlimited deterministic forest memorizes distinct rows
        rng = np.random.default_rng(8)
        X = rng.standard_normal((40, 3))
        y = rng.integers(0, 3, size=40)
        rows = _cls_rows(X, y, q=3)
        model = fit(LearnerSpec(n_trees=3, bootstrap=False, max_features="all",
                                seed=0), rows)
        assert np.array_equal(model.predict(X), y)

    def test_capacity_regression(self):
        rng = np.random.default_rng(9)
        X = rng.standard_normal((30, 2))
        y = rng.standard_normal(30)
        model = fit(LearnerSpec(n_trees=2, bootstrap=False, max_features="all",
                                seed=0), _reg_rows(X, y))
        assert np.allclose(model.predict(X), y)

    def test_xor_fits_exactly(self):
        # zero-gain splits must still be taken for full capacity
        X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y = np.array([0, 1, 1, 0])
        model = fit(LearnerSpec(n_trees=1, bootstrap=False, max_features="all",
                                seed=0), _cls_rows(X, y))
        assert np.array_equal(model.predict(X), y)

    def test_max_depth_limits_tree(self):
        rng = np.random.default_rng(10)
        X = rng.standard_normal((50, 2))
        y = rng.standard_normal(50)
        model = fit(LearnerSpec(n_trees=1, bootstrap=False, max_features="all",
                                max_depth=1, seed=0), _reg_rows(X, y))
        # a depth-1 tree has at most 3 nodes
        assert model.trees[0].feature.shape[0] <= 3


class TestPredict:
    def test_identical_leaf_trees_vote(self):
        model = RandomForestModel([_leaf_tree(2.0)] * 3, Task.CLASSIFICATION, 1, 3)
        assert model.predict([[0.0]]).tolist() == [2]

    def test_tie_goes_to_lowest_class(self):
        model = RandomForestModel([_leaf_tree(0.0), _leaf_tree(1.0)],
                                  Task.CLASSIFICATION, 1, 2)
        assert model.predict([[0.0]]).tolist() == [0]

    def test_regression_mean(self):
        model = RandomForestModel([_leaf_tree(1.0), _leaf_tree(3.0)],
                                  Task.REGRESSION, 1, None)
        assert model.predict([[0.0]]).tolist() == [2.0]

    def test_width_mismatch(self):
        model = RandomForestModel([_leaf_tree(0.0)], Task.REGRESSION, 2, None)
        with pytest.raises(LearnerError):
            model.predict([[1.0]])

    def test_prediction_purity(self, small_regression, tiny_learner):
        ds = small_regression
        rows = ds.rows(np.arange(ds.n_rows))
        model = fit(tiny_learner, rows)
        p1 = model.predict(rows.X)
        p2 = model.predict(rows.X)
        assert np.array_equal(p1, p2)


class TestSerialization:
    def test_round_trip(self, small_classification):
        ds = small_classification
        rows = ds.rows(np.arange(ds.n_rows))
        model = fit(LearnerSpec(n_trees=4, seed=5), rows)
        clone = RandomForestModel.from_json(model.to_json())
        assert np.array_equal(model.predict(rows.X), clone.predict(rows.X))
        assert clone.task is Task.CLASSIFICATION
        assert clone.class_count == 2

    def test_bad_container(self):
        with pytest.raises(LearnerError):
            RandomForestModel.from_json('{"format": "something-else"}')


class TestMaxFeatures:
    def test_resolution(self):
        spec = LearnerSpec()
        assert spec.resolve_max_features(100, Task.CLASSIFICATION) == 10
        assert spec.resolve_max_features(99, Task.REGRESSION) == 33
        assert LearnerSpec(max_features="all").resolve_max_features(7, Task.REGRESSION) == 7
        assert LearnerSpec(max_features=3).resolve_max_features(7, Task.REGRESSION) == 3
        assert LearnerSpec(max_features="third").resolve_max_features(2, Task.REGRESSION) == 1
