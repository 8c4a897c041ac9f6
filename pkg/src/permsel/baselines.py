"""Filter-style feature rankers: absolute Pearson correlation and
equal-width-binned information gain.

Both are pure functions of the rows they are given, invariant to row
order, and break score ties toward the lower feature index.
"""

from __future__ import annotations

import numpy as np

from .dataset import RowView, Task
from .errors import PermselError
from .permutation import FeatureScores


def correlation_rank(view: RowView) -> FeatureScores:
    """Rank features by |Pearson correlation| with the target.

    Classification targets are treated as their class indices cast to
    reals, mirroring the common filter-tool behavior; this is crude for
    unordered classes but cheap and deterministic. Zero-variance features
    score 0.
    """
    if view.n_rows < 2:
        raise PermselError("need at least 2 rows to correlate")
    X = view.X
    y = view.y.astype(float)
    yc = y - y.mean()
    y_norm = np.sqrt(np.sum(yc * yc))
    Xc = X - X.mean(axis=0)
    x_norm = np.sqrt(np.sum(Xc * Xc, axis=0))
    scores = np.zeros(view.n_features)
    if y_norm > 0:
        valid = x_norm > 0
        scores[valid] = np.abs(Xc[:, valid].T @ yc) / (x_norm[valid] * y_norm)
    return FeatureScores(scores)


def infogain_rank(view: RowView, bins: int = 10) -> FeatureScores:
    """Rank features by information gain about a categorical target.

    Each feature is discretized into equal-width intervals over its
    observed range; the score is H(Y) - H(Y | binned feature) in nats.
    Constant features carry no information and score 0.
    """
    if view.task is not Task.CLASSIFICATION:
        raise PermselError("information gain needs a classification task")
    if bins < 2:
        raise PermselError("bins must be at least 2")
    y = view.y.astype(np.int64)
    q = view.class_count if view.class_count is not None else int(y.max()) + 1
    n = view.n_rows
    h_y = _entropy(np.bincount(y, minlength=q))
    scores = np.zeros(view.n_features)
    for j in range(view.n_features):
        col = view.X[:, j]
        lo, hi = float(col.min()), float(col.max())
        if hi <= lo:
            continue
        width = (hi - lo) / bins
        b = np.minimum(((col - lo) / width).astype(np.int64), bins - 1)
        h_cond = 0.0
        for bv in np.unique(b):
            mask = b == bv
            h_cond += (mask.sum() / n) * _entropy(np.bincount(y[mask], minlength=q))
        scores[j] = max(0.0, h_y - h_cond)
    return FeatureScores(scores)


def _entropy(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-np.sum(p * np.log(p)))
