"""Random forest learner behind a pluggable fit/predict contract.

The forest is deterministic: every tree draws from its own stream seeded
by (spec.seed, tree_index), so results do not depend on training order
or parallel schedule. Fitted models are immutable and safe to share.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dataset import RowView, Task
from .errors import LearnerError
from .tree import Tree, grow_tree

_FORMAT = "permsel-random-forest"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class LearnerSpec:
    """Random forest configuration.

    ``max_features`` accepts "sqrt", "third", "all", an integer, or None,
    where None resolves to sqrt for classification and a third of the
    features for regression.
    """

    n_trees: int = 100
    max_features: int | str | None = None
    min_samples_split: int = 2
    max_depth: int | None = None
    bootstrap: bool = True
    seed: int = 0

    def resolve_max_features(self, n_features: int, task: Task) -> int:
        mf = self.max_features
        if mf is None:
            mf = "sqrt" if task is Task.CLASSIFICATION else "third"
        if mf == "sqrt":
            return max(1, int(np.sqrt(n_features)))
        if mf == "third":
            return max(1, n_features // 3)
        if mf == "all":
            return n_features
        if isinstance(mf, int):
            if not (1 <= mf <= n_features):
                raise LearnerError(f"max_features={mf} outside [1, {n_features}]")
            return mf
        raise LearnerError(f"bad max_features: {mf!r}")


class RandomForestModel:
    """Immutable fitted forest. Prediction is a pure function of its input."""

    def __init__(self, trees: list[Tree], task: Task, n_features: int,
                 class_count: int | None):
        self.trees = trees
        self.task = task
        self.n_features = n_features
        self.class_count = class_count

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Majority vote (ties to the lowest class index) or tree mean."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise LearnerError(
                f"expected rows of width {self.n_features}, got shape {X.shape}")
        preds = np.stack([t.predict(X) for t in self.trees])
        if self.task is Task.CLASSIFICATION:
            votes = preds.astype(np.int64)
            counts = np.zeros((X.shape[0], self.class_count), dtype=np.int64)
            rows = np.arange(X.shape[0])
            for t in range(votes.shape[0]):
                counts[rows, votes[t]] += 1
            return np.argmax(counts, axis=1)
        return preds.mean(axis=0)

    def to_json(self) -> str:
        """Versioned JSON container for the fitted state."""
        return json.dumps({
            "format": _FORMAT,
            "version": _FORMAT_VERSION,
            "task": self.task.value,
            "n_features": self.n_features,
            "class_count": self.class_count,
            "trees": [t.to_dict() for t in self.trees],
        })

    @classmethod
    def from_json(cls, text: str) -> "RandomForestModel":
        d = json.loads(text)
        if d.get("format") != _FORMAT:
            raise LearnerError("not a serialized forest")
        if d.get("version") != _FORMAT_VERSION:
            raise LearnerError(f"unsupported version {d.get('version')}")
        trees = [Tree.from_dict(td) for td in d["trees"]]
        return cls(trees, Task(d["task"]), d["n_features"], d["class_count"])


def fit(spec: LearnerSpec, data: RowView) -> RandomForestModel:
    """Train a forest on the given rows.

    With bootstrap on, each tree sees a resample of the rows drawn from
    its own stream; with it off, every tree trains on the full data.
    """
    if spec.n_trees < 1:
        raise LearnerError("n_trees must be at least 1")
    if data.n_rows == 0:
        raise LearnerError("empty training set")
    classification = data.task is Task.CLASSIFICATION
    if classification:
        y = data.y.astype(np.int64)
        class_count = data.class_count if data.class_count is not None \
            else int(y.max()) + 1
        if np.unique(y).size < 1:
            raise LearnerError("no class present in training target")
    else:
        y = data.y.astype(float)
        class_count = 0
    X = data.X
    n, w = X.shape
    max_features = spec.resolve_max_features(w, data.task)
    trees = []
    for t in range(spec.n_trees):
        rng = np.random.default_rng([spec.seed, t])
        if spec.bootstrap:
            sample = rng.integers(0, n, size=n)
            Xt, yt = X[sample], y[sample]
        else:
            Xt, yt = X, y
        trees.append(grow_tree(
            Xt, yt, rng,
            classification=classification,
            class_count=class_count,
            max_features=max_features,
            min_samples_split=spec.min_samples_split,
            max_depth=spec.max_depth,
        ))
    return RandomForestModel(trees, data.task, w,
                             class_count if classification else None)
