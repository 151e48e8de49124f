"""Per-class error, class imbalance, worst-k accuracy and the bias split
into a data part and a training part."""
import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np
import structlog

from dstlab.exceptions import MetricsError

logger = structlog.get_logger()


@dataclass(frozen=True)
class ClassStats:
    per_class_error: np.ndarray
    per_class_count: np.ndarray
    accuracy: float
    prediction_counts: Optional[np.ndarray] = None

    @property
    def num_classes(self) -> int:
        return int(self.per_class_error.shape[0])

    @property
    def per_class_accuracy(self) -> np.ndarray:
        return 1.0 - self.per_class_error

    @property
    def imbalance_ratio(self) -> float:
        if self.prediction_counts is None:
            raise MetricsError("these class stats carry no prediction counts")
        return ratio_from_counts(self.prediction_counts)

    def to_dict(self) -> Dict[str, object]:
        return {
            "accuracy": self.accuracy,
            "per_class_error": self.per_class_error.tolist(),
            "per_class_accuracy": self.per_class_accuracy.tolist(),
            "per_class_count": self.per_class_count.tolist(),
        }


def per_class_error(predictions: Sequence[int], truth: Sequence[int], num_classes: int,
                    warn_unbalanced: bool = True) -> ClassStats:
    """Fraction of mistaken predictions within each true class."""
    predictions = np.asarray(predictions, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if predictions.shape != truth.shape:
        raise MetricsError(f"{predictions.size} predictions for {truth.size} labels")
    counts = np.bincount(truth, minlength=num_classes)[:num_classes]
    if np.any(counts == 0):
        missing = int(np.flatnonzero(counts == 0)[0])
        raise MetricsError(f"class {missing} is absent from the evaluation set")
    if warn_unbalanced and counts.min() != counts.max():
        logger.warning("Evaluation set is not class-balanced", counts=counts.tolist())
    wrong = predictions != truth
    errors = np.bincount(truth[wrong], minlength=num_classes)[:num_classes]
    return ClassStats(
        per_class_error=errors / counts,
        per_class_count=counts,
        accuracy=float(1.0 - wrong.mean()),
        prediction_counts=np.bincount(predictions, minlength=num_classes)[:num_classes],
    )


def ratio_from_counts(counts: Sequence[int]) -> float:
    counts = np.asarray(counts)
    if counts.min() == 0:
        return math.inf
    return float(counts.max() / counts.min())


def imbalance_ratio(predictions: Sequence[int], num_classes: int) -> float:
    """max_c N(c) / min_c N(c) over predicted classes; +inf if a class is never predicted."""
    predictions = np.asarray(predictions, dtype=np.int64)
    if predictions.size == 0:
        raise MetricsError("imbalance ratio needs at least one prediction")
    return ratio_from_counts(np.bincount(predictions, minlength=num_classes)[:num_classes])


def worst_k_accuracy(stats: ClassStats, k: int) -> float:
    """Mean of the k lowest per-class accuracies, ties broken by class index."""
    if k < 1:
        raise MetricsError(f"k must be >= 1, got {k}")
    if k > stats.num_classes:
        raise MetricsError(f"k={k} exceeds the {stats.num_classes} classes")
    accuracy = stats.per_class_accuracy
    worst = np.argsort(accuracy, kind="stable")[:k]
    return float(accuracy[worst].mean())


@dataclass(frozen=True)
class BiasReport:
    data_bias: np.ndarray
    training_bias: np.ndarray
    total: np.ndarray

    def to_dict(self) -> Dict[str, list]:
        return {
            "data_bias": self.data_bias.tolist(),
            "training_bias": self.training_bias.tolist(),
            "total": self.total.tolist(),
        }


def bias_decomposition(init_stats: ClassStats, final_stats: ClassStats) -> BiasReport:
    """Data bias is the initial pseudolabeler's per-class error (the ideal
    classifier has none); training bias is what self-training added on top."""
    if init_stats.num_classes != final_stats.num_classes:
        raise MetricsError(
            f"class count mismatch: {init_stats.num_classes} vs {final_stats.num_classes}")
    data_bias = init_stats.per_class_error.copy()
    training_bias = final_stats.per_class_error - init_stats.per_class_error
    return BiasReport(data_bias, training_bias, data_bias + training_bias)
