"""k-nearest-neighbour classification, stratified splitting and evaluation metrics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset


def _check_k(k, n_train):
    if n_train == 0:
        raise ValueError("empty training set")
    if not 1 <= k <= n_train:
        raise ValueError(f"k must be in [1, {n_train}], got {k}")


def vote(neighbor_labels: np.ndarray, n_classes: int) -> np.ndarray:
    """Majority label per row of ``neighbor_labels`` (rows ordered nearest first).

    Among classes tied for the most votes, the one whose member appears
    first in the neighbour ordering wins.
    """
    neighbor_labels = np.atleast_2d(neighbor_labels)
    q, k = neighbor_labels.shape
    counts = np.zeros((q, n_classes), dtype=np.int64)
    np.add.at(counts, (np.repeat(np.arange(q), k), neighbor_labels.ravel()), 1)
    top = counts.max(axis=1)
    is_top = counts[np.arange(q)[:, None], neighbor_labels] == top[:, None]
    first = is_top.argmax(axis=1)
    return neighbor_labels[np.arange(q), first]


def nearest_labels(sq_dist: np.ndarray, train_labels: np.ndarray, k: int) -> np.ndarray:
    # stable sort: equal distances keep the lower training index first
    order = np.argsort(sq_dist, axis=1, kind="stable")[:, :k]
    return train_labels[order]


def knn_predict_many(train_features, train_labels, queries, k: int = 5, n_classes=None) -> np.ndarray:
    """Brute-force Euclidean k-NN predictions for a batch of queries."""
    X = np.asarray(train_features, dtype=float)
    y = np.asarray(train_labels, dtype=np.int64)
    Q = np.atleast_2d(np.asarray(queries, dtype=float))
    _check_k(k, len(X))
    if n_classes is None:
        n_classes = int(y.max()) + 1
    diff = Q[:, None, :] - X[None, :, :]
    d2 = np.einsum("qnd,qnd->qn", diff, diff)
    return vote(nearest_labels(d2, y, k), n_classes)


def knn_predict(train_features, train_labels, query, k: int = 5) -> int:
    return int(knn_predict_many(train_features, train_labels, np.atleast_2d(query), k)[0])


def error_rate(predictions, truth) -> float:
    p = np.asarray(predictions)
    t = np.asarray(truth)
    if p.shape != t.shape or p.ndim != 1:
        raise ValueError(f"predictions and truth must be 1-D of equal length, got {p.shape} and {t.shape}")
    if len(p) == 0:
        raise ValueError("no predictions to score")
    return int(np.count_nonzero(p != t)) / len(p)


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # rows = true class, columns = predicted class

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def tolist(self):
        return self.counts.tolist()


def confusion(predictions, truth, num_classes: int) -> ConfusionMatrix:
    p = np.asarray(predictions, dtype=np.int64)
    t = np.asarray(truth, dtype=np.int64)
    if p.shape != t.shape:
        raise ValueError("predictions and truth differ in length")
    for name, arr in (("prediction", p), ("truth", t)):
        bad = np.flatnonzero((arr < 0) | (arr >= num_classes))
        if bad.size:
            raise ValueError(f"{name} label {arr[bad[0]]} at position {bad[0]} outside [0, {num_classes})")
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(counts, (t, p), 1)
    return ConfusionMatrix(counts)


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    per_class_accuracy: tuple

    def as_dict(self):
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "per_class_accuracy": list(self.per_class_accuracy),
        }


def _ratio(num, den) -> float:
    return num / den if den else 0.0


def metrics_from_confusion(cm: ConfusionMatrix) -> Metrics:
    """Accuracy, precision, recall and F1 from a confusion matrix.

    Two classes: class 1 is the positive class and the usual TP/TN/FP/FN
    formulas apply. More classes: precision, recall and F1 are macro averages
    of the one-vs-rest values. F1 is written as 2TP / (2TP + FP + FN), which is
    the harmonic mean of precision and recall and is 0 when both are 0.
    """
    c = np.asarray(cm.counts, dtype=np.int64)
    n = int(c.sum())
    if c.ndim != 2 or c.shape[0] != c.shape[1] or n == 0:
        raise ValueError("confusion matrix is empty")
    tp = np.diag(c)
    fp = c.sum(axis=0) - tp
    fn = c.sum(axis=1) - tp
    tn = n - tp - fp - fn
    per_class_acc = tuple(int(tp[i] + tn[i]) / n for i in range(len(tp)))
    accuracy = int(tp.sum()) / n
    if c.shape[0] == 2:
        TP, FP, FN = int(tp[1]), int(fp[1]), int(fn[1])
        precision = _ratio(TP, FP + TP)
        recall = _ratio(TP, FN + TP)
        f1 = _ratio(2 * TP, 2 * TP + FP + FN)
    else:
        precision = float(np.mean([_ratio(int(tp[i]), int(tp[i] + fp[i])) for i in range(len(tp))]))
        recall = float(np.mean([_ratio(int(tp[i]), int(tp[i] + fn[i])) for i in range(len(tp))]))
        f1 = float(np.mean([_ratio(2 * int(tp[i]), int(2 * tp[i] + fp[i] + fn[i])) for i in range(len(tp))]))
    return Metrics(accuracy, precision, recall, f1, per_class_acc)


def stratified_indices(labels, train_fraction: float, seed: int):
    """Per-class shuffled split of row indices; returns (train_idx, test_idx), both sorted."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    train, test = [], []
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if len(idx) < 2:
            raise ValueError(f"class {cls} has {len(idx)} sample(s); at least 2 are needed to split")
        idx = rng.permutation(idx)
        n_train = min(max(int(round(len(idx) * train_fraction)), 1), len(idx) - 1)
        train.append(idx[:n_train])
        test.append(idx[n_train:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def stratified_split(dataset: Dataset, train_fraction: float = 0.70, seed: int = 0):
    tr, te = stratified_indices(dataset.labels, train_fraction, seed)
    return dataset.subset(tr), dataset.subset(te)
