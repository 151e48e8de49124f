"""The k-labels-per-class SSL split.

Training code receives a ``LabeledSet``, an ``UnlabeledPool`` (features
only) and an eval ``LabeledSet``. The unlabeled pool's ground truth stays on
the ``SslSplit`` as a private field that only ``dstlab.metrics`` reads.
"""
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import structlog

from dstlab.data.dataset import Dataset, _frozen
from dstlab.exceptions import ConfigError, SplitError
from dstlab.seeding import rng_stream

logger = structlog.get_logger()


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, features: np.ndarray) -> "Standardizer":
        std = features.std(axis=0)
        return cls(features.mean(axis=0), np.where(std > 0, std, 1.0))

    def apply(self, features: np.ndarray) -> np.ndarray:
        return (features - self.mean) / self.std


@dataclass(frozen=True)
class LabeledSet:
    features: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        object.__setattr__(self, "features", _frozen(self.features, np.float64))
        object.__setattr__(self, "labels", _frozen(self.labels, np.int64))

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes)


@dataclass(frozen=True)
class UnlabeledPool:
    """Unlabeled training features. There is deliberately no label accessor."""
    features: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "features", _frozen(self.features, np.float64))

    def __len__(self) -> int:
        return int(self.features.shape[0])


@dataclass(frozen=True)
class SslSplit:
    labeled: LabeledSet
    unlabeled: UnlabeledPool
    eval: LabeledSet
    k_per_class: int
    include_labeled_in_unlabeled: bool
    num_classes: int
    standardizer: Standardizer
    labeled_indices: Tuple[int, ...]
    grid_shape: Optional[Tuple[int, int]] = None
    _unlabeled_truth: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def input_dim(self) -> int:
        return int(self.labeled.features.shape[1])


def eval_count_per_class(dataset: Dataset, eval_fraction: float) -> int:
    return max(1, int(round(eval_fraction * int(dataset.class_counts().min()))))


def make_ssl_split(dataset: Dataset, k_per_class: int, eval_fraction: float,
                   include_labeled_in_unlabeled: bool, seed: int,
                   standardize: bool = True) -> SslSplit:
    """Stratified split into labeled / unlabeled / class-balanced eval sets.

    Within each class the examples are permuted by the ``split`` stream of
    ``seed``; the first ``k_per_class`` become labeled and the last
    ``n_eval`` become eval, so the labeled subset depends only on the
    dataset, ``k_per_class`` and ``seed``.
    """
    if k_per_class < 1:
        raise ConfigError(f"k_per_class must be positive, got {k_per_class}")
    if not 0.0 < eval_fraction < 1.0:
        raise ConfigError(f"eval_fraction must lie in (0, 1), got {eval_fraction}")

    n_eval = eval_count_per_class(dataset, eval_fraction)
    rng = rng_stream(seed, "split")
    labeled_idx, eval_idx, rest_idx = [], [], []
    for cls in range(dataset.num_classes):
        members = np.flatnonzero(dataset.labels == cls)
        if members.size < k_per_class + n_eval:
            raise SplitError(
                f"class {cls} has {members.size} examples, needs {k_per_class} labeled + {n_eval} eval",
                class_index=cls)
        members = members[rng.permutation(members.size)]
        labeled_idx.append(members[:k_per_class])
        eval_idx.append(members[members.size - n_eval:])
        rest_idx.append(members[k_per_class:members.size - n_eval])

    labeled_idx = np.concatenate(labeled_idx)
    eval_idx = np.sort(np.concatenate(eval_idx))
    rest_idx = np.sort(np.concatenate(rest_idx))
    unlabeled_idx = np.sort(np.concatenate([rest_idx, labeled_idx])) if include_labeled_in_unlabeled else rest_idx

    features = dataset.features
    train_idx = np.sort(np.concatenate([labeled_idx, rest_idx]))
    standardizer = Standardizer.fit(features[train_idx]) if standardize else Standardizer(
        np.zeros(dataset.input_dim), np.ones(dataset.input_dim))
    features = standardizer.apply(features)

    split = SslSplit(
        labeled=LabeledSet(features[labeled_idx], dataset.labels[labeled_idx], dataset.num_classes),
        unlabeled=UnlabeledPool(features[unlabeled_idx]),
        eval=LabeledSet(features[eval_idx], dataset.labels[eval_idx], dataset.num_classes),
        k_per_class=k_per_class,
        include_labeled_in_unlabeled=include_labeled_in_unlabeled,
        num_classes=dataset.num_classes,
        standardizer=standardizer,
        labeled_indices=tuple(int(i) for i in labeled_idx),
        grid_shape=dataset.grid_shape,
        _unlabeled_truth=_frozen(dataset.labels[unlabeled_idx], np.int64),
    )
    logger.info("Built SSL split", dataset=dataset.name, labeled=len(split.labeled),
                unlabeled=len(split.unlabeled), eval=len(split.eval), k_per_class=k_per_class)
    return split
