"""Error-detection and calibration metrics over scored predictions.

Misclassification is the positive class throughout: a good uncertainty
score ranks wrong predictions above correct ones.  Tie handling uses
average ranks (ROC) and grouped thresholds (PR) so the results agree
exactly with pairwise-counting definitions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, UndefinedMetricError

__all__ = [
    "ScoredDataset",
    "CalibrationBins",
    "roc_auc",
    "pr_auc",
    "expected_calibration_error",
    "calibration_bins",
    "brier_score",
    "top_label_brier",
    "point_biserial",
    "spearman",
    "metrics_report",
]


@dataclass(frozen=True)
class ScoredDataset:
    """Aligned (uncertainty score, error indicator, confidence) triples."""

    scores: np.ndarray
    errors: np.ndarray
    confidences: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64).ravel()
        errors = np.asarray(self.errors).ravel()
        confidences = np.asarray(self.confidences, dtype=np.float64).ravel()
        if not (scores.size == errors.size == confidences.size):
            raise InvalidArgumentError("scores, errors, confidences must have equal length")
        if scores.size == 0:
            raise InvalidArgumentError("dataset is empty")
        if not np.all(np.isfinite(scores)):
            raise InvalidArgumentError("scores must be finite")
        if not np.all(np.isin(errors, (0, 1))):
            raise InvalidArgumentError("errors must be 0 or 1")
        if not np.all((confidences >= 0.0) & (confidences <= 1.0)):
            raise InvalidArgumentError("confidences must lie in [0, 1]")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "errors", errors.astype(np.int64))
        object.__setattr__(self, "confidences", confidences)

    def __len__(self) -> int:
        return int(self.scores.size)


def _require_both_classes(data: ScoredDataset) -> tuple[int, int]:
    n1 = int(data.errors.sum())
    n0 = len(data) - n1
    if n1 == 0 or n0 == 0:
        raise UndefinedMetricError("metric needs both correct and wrong predictions")
    return n1, n0


def _average_ranks(x: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned their group's mean rank."""
    order = np.argsort(x, kind="stable")
    sx = x[order]
    boundaries = np.flatnonzero(np.diff(sx) != 0) + 1
    starts = np.concatenate(([0], boundaries))
    ends = np.concatenate((boundaries, [x.size]))
    ranks = np.empty(x.size)
    for lo, hi in zip(starts, ends):
        ranks[order[lo:hi]] = 0.5 * (lo + 1 + hi)
    return ranks


def roc_auc(data: ScoredDataset) -> float:
    """Probability a wrong prediction outranks a correct one (ties count half).

    Computed via the rank formulation of the Mann-Whitney statistic, which
    matches the O(n^2) pairwise count exactly.
    """
    n1, n0 = _require_both_classes(data)
    ranks = _average_ranks(data.scores)
    rank_sum = float(ranks[data.errors == 1].sum())
    return (rank_sum - n1 * (n1 + 1) / 2.0) / (n1 * n0)


def pr_auc(data: ScoredDataset) -> float:
    """Average precision for error detection, tied scores grouped per threshold."""
    n1 = int(data.errors.sum())
    if n1 == 0:
        raise UndefinedMetricError("average precision needs at least one error")
    order = np.argsort(-data.scores, kind="stable")
    sorted_scores = data.scores[order]
    sorted_errors = data.errors[order]
    ap = 0.0
    prev_recall = 0.0
    tp = 0
    seen = 0
    i = 0
    n = len(data)
    while i < n:
        j = i
        while j < n and sorted_scores[j] == sorted_scores[i]:
            tp += int(sorted_errors[j])
            seen += 1
            j += 1
        recall = tp / n1
        precision = tp / seen
        ap += (recall - prev_recall) * precision
        prev_recall = recall
        i = j
    return ap


@dataclass(frozen=True)
class CalibrationBins:
    """Equal-width confidence bins with per-bin counts, accuracy, confidence."""

    edges: np.ndarray
    counts: np.ndarray
    accuracy: np.ndarray
    mean_confidence: np.ndarray


def calibration_bins(data: ScoredDataset, num_bins: int = 10) -> CalibrationBins:
    """Bin confidences into num_bins equal-width buckets on [0, 1]."""
    if num_bins < 1:
        raise InvalidArgumentError("num_bins must be >= 1")
    idx = np.minimum((data.confidences * num_bins).astype(int), num_bins - 1)
    counts = np.bincount(idx, minlength=num_bins)
    accuracy = np.zeros(num_bins)
    mean_conf = np.zeros(num_bins)
    for b in range(num_bins):
        mask = idx == b
        if counts[b]:
            accuracy[b] = 1.0 - data.errors[mask].mean()
            mean_conf[b] = data.confidences[mask].mean()
    return CalibrationBins(
        edges=np.linspace(0.0, 1.0, num_bins + 1),
        counts=counts,
        accuracy=accuracy,
        mean_confidence=mean_conf,
    )


def expected_calibration_error(data: ScoredDataset, num_bins: int = 10) -> float:
    """Count-weighted mean |accuracy - confidence| gap over confidence bins."""
    bins = calibration_bins(data, num_bins)
    n = len(data)
    occupied = bins.counts > 0
    gaps = np.abs(bins.accuracy[occupied] - bins.mean_confidence[occupied])
    return float((bins.counts[occupied] / n * gaps).sum())


def brier_score(probabilities, true_labels) -> float:
    """Mean squared error between class probability rows and one-hot truth."""
    probs = np.asarray(probabilities, dtype=np.float64)
    labels = np.asarray(true_labels, dtype=np.int64).ravel()
    if probs.ndim != 2:
        raise InvalidArgumentError("probabilities must be a 2-D [N x C] matrix")
    if probs.shape[0] != labels.size:
        raise InvalidArgumentError("probabilities and labels must have equal length")
    row_sums = probs.sum(axis=1)
    if np.any(np.abs(row_sums - 1.0) > 1e-6):
        bad = int(np.argmax(np.abs(row_sums - 1.0)))
        raise InvalidArgumentError(
            f"probability row {bad} sums to {row_sums[bad]}, expected 1 within 1e-6"
        )
    if np.any(labels < 0) or np.any(labels >= probs.shape[1]):
        raise InvalidArgumentError("labels must index probability columns")
    onehot = np.zeros_like(probs)
    onehot[np.arange(labels.size), labels] = 1.0
    return float(((probs - onehot) ** 2).sum(axis=1).mean())


def top_label_brier(data: ScoredDataset) -> float:
    """Squared error of the top-label confidence against correctness.

    The full class-probability matrix is not part of a scored dataset, so
    the report scores the maximum probability against the 0/1 correctness
    indicator instead.
    """
    correct = 1.0 - data.errors
    return float(((data.confidences - correct) ** 2).mean())


def point_biserial(data: ScoredDataset) -> float:
    """Correlation between the continuous score and the binary error flag."""
    n1, n0 = _require_both_classes(data)
    n = len(data)
    s = float(np.std(data.scores))  # population standard deviation
    if s == 0.0:
        raise UndefinedMetricError("scores have zero variance")
    m1 = float(data.scores[data.errors == 1].mean())
    m0 = float(data.scores[data.errors == 0].mean())
    return (m1 - m0) / s * math.sqrt(n1 * n0 / (n * n))


def spearman(data: ScoredDataset) -> float:
    """Pearson correlation of average ranks of scores vs. errors."""
    rx = _average_ranks(data.scores)
    ry = _average_ranks(data.errors.astype(np.float64))
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    sx = float((dx * dx).sum())
    sy = float((dy * dy).sum())
    if sx == 0.0 or sy == 0.0:
        raise UndefinedMetricError("spearman needs variance in both variables")
    return float((dx * dy).sum() / math.sqrt(sx * sy))


def metrics_report(data: ScoredDataset, num_bins: int = 10) -> dict:
    """All report metrics as a plain dict, errors-as-positives convention."""
    return {
        "roc_auc": roc_auc(data),
        "pr_auc": pr_auc(data),
        "ece": expected_calibration_error(data, num_bins),
        "brier": top_label_brier(data),
        "point_biserial": point_biserial(data),
        "spearman": spearman(data),
        "n": len(data),
    }
