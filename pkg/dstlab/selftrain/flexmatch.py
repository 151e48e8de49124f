"""Curriculum (per-class) thresholds estimated from recent pseudo labels."""
from collections import deque
from typing import Deque, Sequence

import numpy as np

from dstlab.exceptions import ConfigError
from dstlab.selftrain.pseudo import PseudoBatchRecord, PseudoLabelPolicy

THRESHOLD_FLOOR = 0.5


def flexmatch_lite_thresholds(history: Sequence[int], tau: float, num_classes: int) -> np.ndarray:
    """Per-class thresholds from retained pseudo-label classes in ``history``.

    sigma(c) = count(c) / max count;  tau_c = tau * sigma / (2 - sigma),
    floored at 0.5 * tau. With no retained labels every class gets ``tau``.
    """
    counts = np.bincount(np.asarray(history, dtype=np.int64), minlength=num_classes)[:num_classes]
    if counts.max(initial=0) == 0:
        return np.full(num_classes, float(tau))
    sigma = counts / counts.max()
    thresholds = tau * sigma / (2.0 - sigma)
    return np.maximum(thresholds, THRESHOLD_FLOOR * tau)


class LearningStatus:
    """Sliding window of retained pseudo-label classes, one entry per batch."""

    def __init__(self, num_classes: int, window: int = 50):
        if window < 1:
            raise ConfigError(f"learning-status window must be positive, got {window}")
        self.num_classes = num_classes
        self.batches: Deque[np.ndarray] = deque(maxlen=window)

    def update(self, record: PseudoBatchRecord) -> None:
        self.batches.append(record.predicted_class[record.retained].copy())

    def history(self) -> np.ndarray:
        if not self.batches:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate(list(self.batches))

    def policy(self, base: PseudoLabelPolicy) -> PseudoLabelPolicy:
        return base.with_per_class(flexmatch_lite_thresholds(self.history(), base.tau, self.num_classes))
