"""The only place predictions meet hidden ground truth."""
from typing import Optional

import numpy as np

from dstlab.data.split import LabeledSet, SslSplit
from dstlab.metrics.bias import ClassStats, per_class_error
from dstlab.models.base import ModelBundle


def _hidden_labels(split: SslSplit, index: Optional[np.ndarray] = None) -> np.ndarray:
    truth = split._unlabeled_truth
    return truth if index is None else truth[index]


def annotate_record(record, split: SslSplit, unlabeled_index: np.ndarray):
    """Fill ``record.correct`` from the unlabeled pool's hidden labels."""
    record.correct = record.predicted_class == _hidden_labels(split, unlabeled_index)
    return record


def evaluate_model(model: ModelBundle, labeled: LabeledSet) -> ClassStats:
    """Eval-mode predictions of ``psi`` + ``h`` scored per class."""
    return per_class_error(model.predict(labeled.features), labeled.labels, labeled.num_classes)


def evaluate_on_unlabeled(model: ModelBundle, split: SslSplit) -> ClassStats:
    """Pseudolabeler error measured on the unlabeled pool instead of eval."""
    return per_class_error(model.predict(split.unlabeled.features), _hidden_labels(split),
                           split.num_classes, warn_unbalanced=False)


def evaluate_pseudolabeler(model: ModelBundle, split: SslSplit, estimate_on: str = "eval") -> ClassStats:
    if estimate_on == "unlabeled":
        return evaluate_on_unlabeled(model, split)
    return evaluate_model(model, split.eval)
