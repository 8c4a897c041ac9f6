"""Tabular dataset loading, partitioning, and column permutation.

Datasets are immutable after load: the feature matrix and target vector
are never written to by any operation here. Row subsets are handed out
as fresh ``RowView`` objects, and column shuffles always copy, so
concurrent evaluations never contend on shared state.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    DatasetError,
    EmptyDataError,
    MissingValueError,
    NonNumericValueError,
    SingleClassError,
)


class Task(enum.Enum):
    CLASSIFICATION = "classification"
    REGRESSION = "regression"


class RowView:
    """A row slice of a dataset: feature matrix ``X`` (m rows) plus target ``y``."""

    __slots__ = ("X", "y", "task", "class_count")

    def __init__(self, X: np.ndarray, y: np.ndarray, task: Task,
                 class_count: int | None = None):
        self.X = X
        self.y = y
        self.task = task
        self.class_count = class_count

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def select_features(self, indices) -> "RowView":
        """View restricted to the given feature columns (copying)."""
        idx = np.asarray(sorted(indices), dtype=np.int64)
        return RowView(self.X[:, idx].copy(), self.y, self.task, self.class_count)


class Dataset:
    """Numeric tabular data with one target column.

    Classification targets are stored as indices 0..q-1 in order of first
    appearance; the original labels are kept in ``class_names``. When
    ``row_access_log`` is set to a ``set``, every ``rows()`` call records
    the indices it touched, which lets tests assert that held-out rows
    were never visible to a selection method.
    """

    def __init__(self, X: np.ndarray, y: np.ndarray, task: Task,
                 feature_names: list[str], class_names: list[str] | None = None,
                 target_name: str = "target"):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DatasetError("feature matrix must be 2-D with at least one row and column")
        if not np.isfinite(X).all():
            raise DatasetError("feature matrix contains non-finite values")
        if len(feature_names) != X.shape[1]:
            raise DatasetError("feature_names length does not match column count")
        if y.shape != (X.shape[0],):
            raise DatasetError("target length does not match row count")
        if task is Task.CLASSIFICATION:
            y = np.asarray(y, dtype=np.int64)
            if class_names is None or len(class_names) < 2:
                raise SingleClassError("classification needs at least two classes")
            if y.min() < 0 or y.max() >= len(class_names):
                raise DatasetError("class index outside [0, class_count)")
        else:
            y = np.asarray(y, dtype=float)
            if not np.isfinite(y).all():
                raise DatasetError("regression target contains non-finite values")
        self.X = X
        self.y = y
        self.task = task
        self.feature_names = list(feature_names)
        self.class_names = list(class_names) if class_names is not None else None
        self.target_name = target_name
        self.row_access_log: set[int] | None = None

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def class_count(self) -> int | None:
        return len(self.class_names) if self.class_names is not None else None

    def rows(self, indices) -> RowView:
        """Copy the given rows into a RowView, logging access if enabled."""
        idx = np.asarray(indices, dtype=np.int64)
        if self.row_access_log is not None:
            self.row_access_log.update(int(i) for i in idx)
        return RowView(self.X[idx].copy(), self.y[idx].copy(), self.task,
                       self.class_count)


@dataclass(frozen=True)
class Partition:
    """Disjoint covering row-index sets: 60% train, 20% validation, 20% test."""

    train_idx: np.ndarray
    val_idx: np.ndarray
    test_idx: np.ndarray

    @property
    def train_val_idx(self) -> np.ndarray:
        """Union of train and validation indices, in stored order."""
        return np.concatenate([self.train_idx, self.val_idx])


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a synthetic linear regression dataset."""

    n_instances: int
    n_features: int
    n_informative: int
    noise: float
    seed: int = 0

    def validate(self):
        if self.n_instances < 1 or self.n_features < 1:
            raise DatasetError("need at least one instance and one feature")
        if not (1 <= self.n_informative <= self.n_features):
            raise DatasetError("n_informative must be in [1, n_features]")
        if self.noise < 0:
            raise DatasetError("noise must be nonnegative")


def load_csv(path, task: Task, target_col: int | None = None) -> Dataset:
    """Load a headered CSV into a Dataset.

    The target column defaults to the last one. Feature cells must be
    numeric; the loader rejects empty cells and short rows outright.
    Classification labels are mapped to 0..q-1 in first-appearance order.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataError(f"{path}: empty file") from None
        rows = list(reader)
    if not rows:
        raise EmptyDataError(f"{path}: no data rows")
    n_cols = len(header)
    if n_cols < 2:
        raise DatasetError(f"{path}: need at least one feature column and a target")
    tcol = n_cols - 1 if target_col is None else target_col
    if not (0 <= tcol < n_cols):
        raise DatasetError(f"target column {tcol} out of range")

    feat_cols = [j for j in range(n_cols) if j != tcol]
    X = np.empty((len(rows), len(feat_cols)), dtype=float)
    raw_targets: list[str] = []
    for i, row in enumerate(rows):
        if len(row) != n_cols:
            raise MissingValueError(i + 2, len(row) + 1)
        for k, j in enumerate(feat_cols):
            cell = row[j].strip()
            if cell == "":
                raise MissingValueError(i + 2, j + 1)
            try:
                X[i, k] = float(cell)
            except ValueError:
                raise NonNumericValueError(i + 2, j + 1, row[j]) from None
        tcell = row[tcol].strip()
        if tcell == "":
            raise MissingValueError(i + 2, tcol + 1)
        raw_targets.append(tcell)

    feature_names = [header[j] for j in feat_cols]
    target_name = header[tcol]
    if task is Task.CLASSIFICATION:
        class_names: list[str] = []
        index: dict[str, int] = {}
        y = np.empty(len(raw_targets), dtype=np.int64)
        for i, label in enumerate(raw_targets):
            if label not in index:
                index[label] = len(class_names)
                class_names.append(label)
            y[i] = index[label]
        if len(class_names) < 2:
            raise SingleClassError(f"{path}: classification target has a single class")
        return Dataset(X, y, task, feature_names, class_names, target_name)
    try:
        y = np.array([float(t) for t in raw_targets], dtype=float)
    except ValueError:
        bad = next(t for t in raw_targets if not _is_float(t))
        raise NonNumericValueError(0, tcol + 1, bad) from None
    return Dataset(X, y, task, feature_names, None, target_name)


def _is_float(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def write_csv(dataset: Dataset, path):
    """Write a Dataset back to CSV. Floats use repr so reloads are bit-exact."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(dataset.feature_names + [dataset.target_name])
        for i in range(dataset.n_rows):
            cells = [repr(float(v)) for v in dataset.X[i]]
            if dataset.task is Task.CLASSIFICATION:
                cells.append(dataset.class_names[int(dataset.y[i])])
            else:
                cells.append(repr(float(dataset.y[i])))
            writer.writerow(cells)


def _part_sizes(s: int) -> tuple[int, int, int]:
    n_train = int(np.floor(0.6 * s + 0.5))
    n_val = int(np.floor(0.2 * s + 0.5))
    return n_train, n_val, s - n_train - n_val


def split(dataset: Dataset, seed: int, stratified: bool = False) -> Partition:
    """Partition rows into train/validation/test at 60/20/20.

    Sizes follow floor(fraction * s + 0.5) for train and validation, with
    the remainder going to test. Stratified mode (classification only)
    keeps every class within one row of its proportional share in each
    part while still hitting the global sizes exactly.
    """
    s = dataset.n_rows
    if s < 5:
        raise DatasetError("need at least 5 rows to split")
    if stratified and dataset.task is not Task.CLASSIFICATION:
        raise DatasetError("stratified split requires a classification task")
    n_train, n_val, n_test = _part_sizes(s)
    if min(n_train, n_val, n_test) < 1:
        raise DatasetError("dataset too small: a part would be empty")
    rng = np.random.default_rng(seed)
    if not stratified:
        perm = rng.permutation(s)
        return Partition(
            train_idx=np.sort(perm[:n_train]),
            val_idx=np.sort(perm[n_train:n_train + n_val]),
            test_idx=np.sort(perm[n_train + n_val:]),
        )

    q = dataset.class_count
    class_indices = [np.flatnonzero(dataset.y == c) for c in range(q)]
    counts = np.array([len(ix) for ix in class_indices])
    alloc = _stratified_allocation(counts, n_train, n_val)
    train, val, test = [], [], []
    for c in range(q):
        ix = class_indices[c][rng.permutation(counts[c])]
        a, b = alloc[c, 0], alloc[c, 0] + alloc[c, 1]
        train.append(ix[:a])
        val.append(ix[a:b])
        test.append(ix[b:])
    return Partition(
        train_idx=np.sort(np.concatenate(train)),
        val_idx=np.sort(np.concatenate(val)),
        test_idx=np.sort(np.concatenate(test)),
    )


def _stratified_allocation(counts: np.ndarray, n_train: int, n_val: int) -> np.ndarray:
    """Per-class (train, val, test) counts.

    Starts from per-class rounding of the 60/80 cumulative quotas, then
    repairs the global totals with single-row moves that are only applied
    when the donor class stays within one row of proportional in every
    part. Availability of such moves follows from the deviations summing
    to the (bounded) global rounding error.
    """
    q = len(counts)
    a = np.floor(0.6 * counts + 0.5).astype(np.int64)            # train
    b = np.floor(0.8 * counts + 0.5).astype(np.int64)            # train + val
    a = np.minimum(a, b)

    def devs(c):
        tr, va = a[c], b[c] - a[c]
        te = counts[c] - b[c]
        return (tr - 0.6 * counts[c], va - 0.2 * counts[c], te - 0.2 * counts[c])

    def ok(c):
        return all(abs(d) <= 1.0 + 1e-9 for d in devs(c))

    # Fix the train total by moving rows across the train boundary.
    for _ in range(10 * q + 10):
        delta = n_train - int(a.sum())
        if delta == 0:
            break
        step = 1 if delta > 0 else -1
        moved = False
        order = np.argsort([devs(c)[0] for c in range(q)])
        if step > 0:
            order = order  # most under-allocated first
        else:
            order = order[::-1]
        for c in order:
            na = a[c] + step
            if na < 0 or na > b[c]:
                continue
            old = a[c]
            a[c] = na
            if ok(c):
                moved = True
                break
            a[c] = old
        if not moved:
            raise AssertionError("stratified allocation: no feasible train move")

    # Fix the val total by moving rows across the val/test boundary.
    for _ in range(10 * q + 10):
        delta = (n_train + n_val) - int(b.sum())
        if delta == 0:
            break
        step = 1 if delta > 0 else -1
        moved = False
        order = np.argsort([devs(c)[1] for c in range(q)])
        if step < 0:
            order = order[::-1]
        for c in order:
            nb = b[c] + step
            if nb < a[c] or nb > counts[c]:
                continue
            old = b[c]
            b[c] = nb
            if ok(c):
                moved = True
                break
            b[c] = old
        if not moved:
            raise AssertionError("stratified allocation: no feasible val move")

    out = np.empty((q, 3), dtype=np.int64)
    out[:, 0] = a
    out[:, 1] = b - a
    out[:, 2] = counts - b
    return out


def shuffle_column(view: RowView, col: int, rng: np.random.Generator) -> RowView:
    """Copy of the view with one feature column uniformly permuted.

    All other columns and the target are untouched; the source view is
    never mutated.
    """
    if not (0 <= col < view.n_features):
        raise DatasetError(f"column {col} out of range for width {view.n_features}")
    X = view.X.copy()
    X[:, col] = rng.permutation(X[:, col])
    return RowView(X, view.y, view.task, view.class_count)


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Seeded synthetic regression data with a linear signal.

    The target is a linear combination of the first ``n_informative``
    columns with standard-normal coefficients; the remaining columns are
    independent noise. ``spec.noise`` scales additive Gaussian noise
    relative to the standard deviation of the noiseless signal, so 0.1
    means noise at 10% of the signal spread. The generating coefficients
    are stored on the returned dataset as ``coefficients``.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    X = rng.standard_normal((spec.n_instances, spec.n_features))
    coef = rng.standard_normal(spec.n_informative)
    signal = X[:, :spec.n_informative] @ coef
    if spec.noise > 0:
        sigma = float(signal.std())
        y = signal + rng.normal(0.0, spec.noise * sigma, size=spec.n_instances)
    else:
        y = signal
    names = [f"f{i}" for i in range(spec.n_features)]
    ds = Dataset(X, y, Task.REGRESSION, names, None, "target")
    ds.coefficients = coef
    ds.n_informative = spec.n_informative
    return ds
