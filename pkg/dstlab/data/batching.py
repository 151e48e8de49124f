"""Joint labeled/unlabeled batch iteration."""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import structlog

from dstlab.data.augment import AugmentationSpec, Strength, augment_batch
from dstlab.data.split import SslSplit
from dstlab.exceptions import ConfigError, ContractError
from dstlab.seeding import rng_stream

logger = structlog.get_logger()


@dataclass(frozen=True)
class BatchPlan:
    labeled_batch: int
    unlabeled_ratio: int
    seed: int = 0

    def __post_init__(self):
        if self.labeled_batch < 1:
            raise ConfigError(f"labeled_batch must be positive, got {self.labeled_batch}")
        if self.unlabeled_ratio < 1:
            raise ConfigError(f"unlabeled_ratio must be positive, got {self.unlabeled_ratio}")

    @property
    def unlabeled_batch(self) -> int:
        return self.unlabeled_ratio * self.labeled_batch


class IndexCycler:
    """Endless shuffled pass over ``range(size)``.

    A batch that runs past the end of an epoch is completed from the next
    epoch's fresh permutation.
    """

    def __init__(self, size: int, batch_size: int, rng: np.random.Generator):
        if size < 1:
            raise ContractError("cannot draw batches from an empty pool")
        self.size = size
        self.batch_size = batch_size
        self.rng = rng
        self.epoch = 0
        self._order = rng.permutation(size)
        self._cursor = 0

    def next(self) -> np.ndarray:
        parts, needed = [], self.batch_size
        while needed:
            if self._cursor == self.size:
                self._order = self.rng.permutation(self.size)
                self._cursor = 0
                self.epoch += 1
            take = min(needed, self.size - self._cursor)
            parts.append(self._order[self._cursor:self._cursor + take])
            self._cursor += take
            needed -= take
        return np.concatenate(parts)


@dataclass(frozen=True)
class JointBatch:
    labeled_x: np.ndarray
    labeled_y: np.ndarray
    unlabeled_x: np.ndarray
    unlabeled_index: np.ndarray


@dataclass(frozen=True)
class StepViews:
    """Augmented inputs for one training step."""
    labeled_weak: np.ndarray
    labeled_y: np.ndarray
    unlabeled_weak: np.ndarray
    unlabeled_strong: np.ndarray
    unlabeled_index: np.ndarray

    @property
    def unlabeled_size(self) -> int:
        return int(self.unlabeled_weak.shape[0])


class JointBatcher:
    """Independent cyclers over the labeled set and the unlabeled pool."""

    def __init__(self, split: SslSplit, plan: BatchPlan):
        self.split = split
        self.plan = plan
        self.labeled = IndexCycler(len(split.labeled), plan.labeled_batch,
                                   rng_stream(plan.seed, "shuffle.labeled"))
        self.unlabeled = IndexCycler(len(split.unlabeled), plan.unlabeled_batch,
                                     rng_stream(plan.seed, "shuffle.unlabeled"))

    def next_joint_batch(self) -> JointBatch:
        li = self.labeled.next()
        ui = self.unlabeled.next()
        return JointBatch(
            labeled_x=self.split.labeled.features[li],
            labeled_y=self.split.labeled.labels[li],
            unlabeled_x=self.split.unlabeled.features[ui],
            unlabeled_index=ui,
        )


def next_joint_batch(batcher: JointBatcher) -> JointBatch:
    return batcher.next_joint_batch()


class ViewMaker:
    """Turns joint batches into weak/strong views with dedicated streams."""

    def __init__(self, spec: AugmentationSpec, seed: int,
                 grid_shape: Optional[Tuple[int, int]] = None):
        self.spec = spec
        self.grid_shape = grid_shape
        self.labeled_rng = rng_stream(seed, "aug.labeled")
        self.unlabeled_rng = rng_stream(seed, "aug.unlabeled")

    def __call__(self, batch: JointBatch) -> StepViews:
        return StepViews(
            labeled_weak=augment_batch(batch.labeled_x, self.spec, Strength.WEAK,
                                       self.labeled_rng, self.grid_shape),
            labeled_y=batch.labeled_y,
            unlabeled_weak=augment_batch(batch.unlabeled_x, self.spec, Strength.WEAK,
                                         self.unlabeled_rng, self.grid_shape),
            unlabeled_strong=augment_batch(batch.unlabeled_x, self.spec, Strength.STRONG,
                                           self.unlabeled_rng, self.grid_shape),
            unlabeled_index=batch.unlabeled_index,
        )
