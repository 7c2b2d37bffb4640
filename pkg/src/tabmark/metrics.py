"""Distribution-drift, correlation and classification metrics.

Divergences are in bits (base-2 logs). The naive-Bayes classifier is the
reference model used to check that watermarking does not move the detection
rate; it is deliberately simple and deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError


def _as_probabilities(hist, name: str) -> np.ndarray:
    arr = np.asarray(hist, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ConfigError(f"{name} must be a non-empty 1-d histogram")
    if np.any(arr < 0):
        raise ConfigError(f"{name} must be non-negative")
    total = arr.sum()
    if total == 0:
        raise ConfigError(f"{name} must contain at least one count")
    return arr / total


def kl_divergence(p, q) -> float:
    """Kullback-Leibler divergence D(P || Q) in bits over shared bins.

    Zero-probability P bins contribute nothing; a bin with P > 0 but Q = 0
    makes the divergence infinite.
    """
    p = _as_probabilities(p, "p")
    q = _as_probabilities(q, "q")
    if p.shape != q.shape:
        raise ConfigError("histograms must share the same bins")
    mask = p > 0
    if np.any(q[mask] == 0):
        return math.inf
    return float(np.sum(p[mask] * np.log2(p[mask] / q[mask])))


def jensen_shannon(p, q) -> float:
    """Jensen-Shannon divergence in bits: symmetric, finite, within [0, 1]."""
    p = _as_probabilities(p, "p")
    q = _as_probabilities(q, "q")
    if p.shape != q.shape:
        raise ConfigError("histograms must share the same bins")
    m = 0.5 * (p + q)
    return 0.5 * kl_divergence(p, m) + 0.5 * kl_divergence(q, m)


def histogram(values, edges) -> np.ndarray:
    """Counts over fixed edges; values outside the range land in end bins."""
    edges = np.asarray(edges, dtype=np.float64)
    idx = np.searchsorted(edges, np.asarray(values, dtype=np.float64),
                          side="right") - 1
    idx = np.clip(idx, 0, edges.size - 2)
    return np.bincount(idx, minlength=edges.size - 1).astype(np.int64)


def bit_correlation(expected, decoded) -> float:
    """Pearson correlation between two 0/1 sequences, exact at +-1.

    Uses integer arithmetic so identical sequences give exactly 1.0 and
    complementary ones exactly -1.0. When both sequences are constant the
    correlation is undefined; it is reported as 1.0 when they are equal and
    0.0 otherwise.
    """
    a = [int(x) for x in expected]
    b = [int(x) for x in decoded]
    if len(a) != len(b):
        raise ConfigError("bit strings must have equal length")
    if not a:
        raise ConfigError("bit strings must be non-empty")
    n = len(a)
    sum_a, sum_b = sum(a), sum(b)
    var_a = n * sum(x * x for x in a) - sum_a * sum_a
    var_b = n * sum(x * x for x in b) - sum_b * sum_b
    if var_a == 0 or var_b == 0:
        return 1.0 if a == b else 0.0
    num = n * sum(x * y for x, y in zip(a, b)) - sum_a * sum_b
    den_sq = var_a * var_b
    if num * num == den_sq:
        return 1.0 if num > 0 else -1.0
    return num / math.sqrt(den_sq)


@dataclass(frozen=True)
class ClassificationStats:
    """Confusion counts plus detection rate / false-alarm rate (percent)."""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def detection_rate(self) -> float:
        positives = self.tp + self.fn
        return 100.0 * self.tp / positives if positives else 0.0

    @property
    def false_alarm_rate(self) -> float:
        negatives = self.fp + self.tn
        return 100.0 * self.fp / negatives if negatives else 0.0


def classification_stats(truth, predicted, positive_label=None) -> ClassificationStats:
    """Binary confusion counts. ``positive_label`` defaults to the larger label."""
    truth = list(truth)
    predicted = list(predicted)
    if len(truth) != len(predicted):
        raise ConfigError("label sequences must have equal length")
    labels = sorted(set(truth) | set(predicted))
    if len(labels) > 2:
        raise DataError(f"expected binary labels, got {labels}")
    if positive_label is None:
        positive_label = labels[-1]
    tp = fp = tn = fn = 0
    for t, p in zip(truth, predicted):
        if p == positive_label:
            if t == positive_label:
                tp += 1
            else:
                fp += 1
        else:
            if t == positive_label:
                fn += 1
            else:
                tn += 1
    return ClassificationStats(tp, fp, tn, fn)


class GaussianNaiveBayes:
    """Gaussian naive Bayes over numeric features; variance floor 1e-9."""

    VAR_FLOOR = 1e-9

    def __init__(self):
        self.classes_: np.ndarray | None = None
        self.priors_: np.ndarray | None = None
        self.means_: np.ndarray | None = None
        self.vars_: np.ndarray | None = None

    def fit(self, matrix: np.ndarray, labels) -> "GaussianNaiveBayes":
        matrix = np.asarray(matrix, dtype=np.float64)
        y = np.asarray(list(labels), dtype=object)
        if matrix.shape[0] != y.size:
            raise ConfigError("matrix and labels disagree on row count")
        self.classes_ = np.unique(y)
        n_classes = self.classes_.size
        n_features = matrix.shape[1]
        self.priors_ = np.empty(n_classes)
        self.means_ = np.empty((n_classes, n_features))
        self.vars_ = np.empty((n_classes, n_features))
        for i, cls in enumerate(self.classes_):
            rows = matrix[y == cls]
            self.priors_[i] = rows.shape[0] / matrix.shape[0]
            self.means_[i] = rows.mean(axis=0)
            self.vars_[i] = np.maximum(rows.var(axis=0), self.VAR_FLOOR)
        return self

    def predict(self, matrix: np.ndarray) -> list:
        if self.classes_ is None:
            raise ConfigError("classifier is not fitted")
        matrix = np.asarray(matrix, dtype=np.float64)
        log_posterior = np.log(self.priors_)[None, :] + np.stack([
            -0.5 * np.sum(
                np.log(2.0 * np.pi * self.vars_[i])
                + (matrix - self.means_[i]) ** 2 / self.vars_[i],
                axis=1)
            for i in range(self.classes_.size)
        ], axis=1)
        winners = np.argmax(log_posterior, axis=1)
        return [self.classes_[i] for i in winners]


def reference_classifier_train(dataset) -> GaussianNaiveBayes:
    """Fit the reference model on a dataset with a binary class column."""
    labels = set(dataset.labels)
    if len(labels) != 2:
        raise DataError(f"expected a binary class column, got {sorted(labels)}")
    return GaussianNaiveBayes().fit(dataset.matrix, dataset.labels)


def reference_classifier_predict(model: GaussianNaiveBayes, dataset) -> list:
    return model.predict(dataset.matrix)
