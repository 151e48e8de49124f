"""Quantity and quality of pseudo labels over a sliding window of batches."""
import math
from collections import deque
from dataclasses import dataclass
from typing import Deque, Iterable, Optional

import numpy as np

from dstlab.exceptions import MetricsError
from dstlab.metrics.bias import ratio_from_counts

NOT_AVAILABLE = "n/a"


@dataclass(frozen=True)
class PseudoLabelStats:
    quantity: float
    quality: Optional[float]
    per_class_retained: np.ndarray
    imbalance_ratio: float
    retained: int
    total: int

    def quality_or_sentinel(self):
        return NOT_AVAILABLE if self.quality is None else self.quality


def pseudo_stats(records: Iterable) -> PseudoLabelStats:
    """Pool annotated pseudo-label records.

    quantity = retained / total rows; quality = share of retained labels that
    are correct, None when nothing was retained.
    """
    records = list(records)
    if not records:
        raise MetricsError("pseudo-label statistics need at least one record")
    num_classes = records[0].num_classes
    total = sum(len(r) for r in records)
    retained = sum(r.retained_count for r in records)
    histogram = np.zeros(num_classes, dtype=np.int64)
    correct = 0
    for record in records:
        histogram += record.class_histogram()
        if record.correct is None:
            raise MetricsError("pseudo-label record was not joined with ground truth")
        correct += int(np.sum(record.correct & record.retained))
    return PseudoLabelStats(
        quantity=retained / total if total else 0.0,
        quality=correct / retained if retained else None,
        per_class_retained=histogram,
        imbalance_ratio=ratio_from_counts(histogram) if retained else math.inf,
        retained=retained,
        total=total,
    )


class PseudoStatsWindow:
    def __init__(self, window: int = 100):
        self.records: Deque = deque(maxlen=window)

    def add(self, record) -> None:
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def stats(self) -> Optional[PseudoLabelStats]:
        return pseudo_stats(self.records) if self.records else None
