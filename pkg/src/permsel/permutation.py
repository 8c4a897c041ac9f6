"""Permutation-degradation scoring for feature subsets and single features.

The merit of a subset is the absolute change in a model's performance
when every selected column of the evaluation rows is independently
shuffled. Scoring never retrains the model and never mutates the
evaluation rows; all randomness comes from the caller's stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import RowView, Task
from .errors import PermselError
from .metrics import Metric, score


class EvalContext:
    """A trained model bound to fixed evaluation rows and a metric.

    The baseline performance is computed once at construction and reused
    by every merit call against this context.
    """

    def __init__(self, model, eval_rows: RowView, metric: Metric):
        if eval_rows.n_features != model.n_features:
            raise PermselError(
                f"eval rows width {eval_rows.n_features} != model width {model.n_features}")
        if metric is Metric.NRMSE:
            raise PermselError("nRMSE needs an external reference; use RMSE here")
        self.model = model
        self.eval_rows = eval_rows
        self.metric = metric
        self.baseline_perf = self._evaluate(eval_rows.X)

    @property
    def n_features(self) -> int:
        return self.eval_rows.n_features

    def _evaluate(self, X: np.ndarray) -> float:
        yhat = self.model.predict(X)
        return score(self.metric, self.eval_rows.y, yhat,
                     class_count=self.eval_rows.class_count)

    def metric_range(self) -> float:
        """Upper bound on achievable merit, used to normalize diagnostics."""
        if self.metric in (Metric.ACC, Metric.BA):
            return 1.0
        if self.eval_rows.task is Task.REGRESSION:
            span = float(np.ptp(self.eval_rows.y))
            return span if span > 0 else 1.0
        return 1.0


@dataclass(frozen=True)
class FeatureScores:
    """Per-feature importance scores with a descending ranking.

    Ties rank the lower feature index first.
    """

    scores: np.ndarray
    ranking: np.ndarray = field(default=None)

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=float)
        object.__setattr__(self, "scores", scores)
        if self.ranking is None:
            # stable sort on negated scores: ties keep ascending index order
            object.__setattr__(self, "ranking",
                               np.argsort(-scores, kind="stable"))


def merit(ctx: EvalContext, chromosome, rng: np.random.Generator) -> float:
    """Absolute performance degradation when the selected columns are shuffled.

    Each selected column gets its own independent permutation, drawn in
    ascending column order from ``rng``. An empty selection leaves the
    rows untouched, so its merit is exactly zero.
    """
    bits = np.asarray(chromosome)
    if bits.shape != (ctx.n_features,):
        raise PermselError(
            f"chromosome length {bits.shape} != feature count {ctx.n_features}")
    selected = np.flatnonzero(bits)
    if selected.size == 0:
        return 0.0
    Xp = ctx.eval_rows.X.copy()
    for col in selected:
        Xp[:, col] = rng.permutation(Xp[:, col])
    shuffled_perf = ctx._evaluate(Xp)
    return abs(ctx.baseline_perf - shuffled_perf)


def merit_mc(ctx: EvalContext, chromosome, repeats: int,
             rng: np.random.Generator) -> float:
    """Mean of independent merit draws, for callers wanting lower variance."""
    if repeats < 1:
        raise PermselError("repeats must be at least 1")
    return float(np.mean([merit(ctx, chromosome, rng) for _ in range(repeats)]))


def pfi_rank(ctx: EvalContext, repeats: int = 5,
             rng: np.random.Generator | None = None) -> FeatureScores:
    """Single-feature permutation importance over all columns.

    score_i is the mean over ``repeats`` of the absolute performance
    change with only column i shuffled. Draws come from ``rng`` in
    feature-major order (all repeats of feature 0, then feature 1, ...).
    """
    if repeats < 1:
        raise PermselError("repeats must be at least 1")
    if rng is None:
        rng = np.random.default_rng(0)
    w = ctx.n_features
    X = ctx.eval_rows.X
    Xp = X.copy()
    scores = np.zeros(w)
    for col in range(w):
        acc = 0.0
        for _ in range(repeats):
            Xp[:, col] = rng.permutation(X[:, col])
            acc += abs(ctx.baseline_perf - ctx._evaluate(Xp))
        Xp[:, col] = X[:, col]
        scores[col] = acc / repeats
    return FeatureScores(scores)


def select_top_k(scores: FeatureScores, k: int) -> np.ndarray:
    """First k features of the ranking, as a sorted index array."""
    w = scores.scores.shape[0]
    if not (1 <= k <= w):
        raise PermselError(f"k={k} outside [1, {w}]")
    return np.sort(scores.ranking[:k])
