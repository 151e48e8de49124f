"""Thresholded pseudo labels and the two cross-entropy objectives built on them."""
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from dstlab.exceptions import ConfigError, ContractError
from dstlab.models.base import MAIN_HEAD, ModelBundle
from dstlab.nn.functional import DEFAULT_CLAMP_EPS, IGNORE_INDEX, softmax_cross_entropy
from dstlab.nn.tensor import Tensor


@dataclass(frozen=True)
class PseudoLabelPolicy:
    """Global threshold ``tau``, optionally relaxed per class.

    Ties in the argmax go to the lowest class index.
    """
    tau: float
    per_class_tau: Optional[np.ndarray] = None

    def __post_init__(self):
        if not 0.0 < self.tau <= 1.0:
            raise ConfigError(f"tau must lie in (0, 1], got {self.tau}")
        if self.per_class_tau is not None:
            per_class = np.asarray(self.per_class_tau, dtype=np.float64)
            if np.any(per_class > self.tau + 1e-12) or np.any(per_class <= 0):
                raise ConfigError(f"per-class thresholds must lie in (0, tau={self.tau}]")
            object.__setattr__(self, "per_class_tau", per_class)

    def with_per_class(self, per_class_tau: Sequence[float]) -> "PseudoLabelPolicy":
        return PseudoLabelPolicy(self.tau, np.asarray(per_class_tau, dtype=np.float64))

    def thresholds(self, predicted_class: np.ndarray) -> np.ndarray:
        if self.per_class_tau is None:
            return np.full(predicted_class.shape, self.tau)
        return self.per_class_tau[predicted_class]


@dataclass
class PseudoBatchRecord:
    predicted_class: np.ndarray
    confidence: np.ndarray
    retained: np.ndarray
    num_classes: int
    # Filled in by dstlab.metrics from the hidden labels, never by training code.
    correct: Optional[np.ndarray] = field(default=None, repr=False)

    def __len__(self) -> int:
        return int(self.predicted_class.shape[0])

    @property
    def targets(self) -> np.ndarray:
        return np.where(self.retained, self.predicted_class, IGNORE_INDEX)

    @property
    def retained_count(self) -> int:
        return int(self.retained.sum())

    def class_histogram(self) -> np.ndarray:
        return np.bincount(self.predicted_class[self.retained], minlength=self.num_classes)


def pseudo_label_from_probs(probs: np.ndarray, policy: PseudoLabelPolicy) -> PseudoBatchRecord:
    predicted = np.argmax(probs, axis=1)
    confidence = probs[np.arange(probs.shape[0]), predicted]
    return PseudoBatchRecord(
        predicted_class=predicted,
        confidence=confidence,
        retained=confidence >= policy.thresholds(predicted),
        num_classes=probs.shape[1],
    )


def pseudo_label(model: ModelBundle, x_weak: np.ndarray, policy: PseudoLabelPolicy,
                 head: str = MAIN_HEAD) -> PseudoBatchRecord:
    """Label weak views with ``head``; Eval mode, nothing recorded."""
    return pseudo_label_from_probs(model.predict_proba(x_weak, head), policy)


def supervised_loss(model: ModelBundle, x_weak: np.ndarray, y: np.ndarray,
                    head: str = MAIN_HEAD, clamp_eps: float = DEFAULT_CLAMP_EPS) -> Tensor:
    """Mean CE of ``head(psi(x))`` against ``y``."""
    y = np.asarray(y)
    if y.size == 0:
        raise ContractError("supervised_loss needs a non-empty labeled batch")
    return softmax_cross_entropy(model.logits(x_weak, head), y, y.shape[0], clamp_eps)


def unlabeled_loss(model: ModelBundle, head: str, record: PseudoBatchRecord,
                   x_strong: np.ndarray, clamp_eps: float = DEFAULT_CLAMP_EPS) -> Tensor:
    """CE against retained pseudo labels, summed and divided by the full batch size."""
    if len(record) != np.asarray(x_strong).shape[0]:
        raise ContractError(
            f"pseudo-label record covers {len(record)} rows, batch has {np.asarray(x_strong).shape[0]}")
    return softmax_cross_entropy(model.logits(x_strong, head), record.targets, len(record), clamp_eps)
