"""Immutable feature/label containers."""
import hashlib
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from dstlab.exceptions import ConfigError, DimensionError


def _frozen(array: np.ndarray, dtype) -> np.ndarray:
    out = np.array(array, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Example:
    """One instance; ``label`` is None when unknown."""
    features: np.ndarray
    label: Optional[int] = None


@dataclass(frozen=True)
class Dataset:
    """Labeled feature matrix with ``num_classes`` classes.

    Arrays are stored read-only, so nothing downstream can mutate a dataset
    in place.
    """
    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    name: str = "dataset"
    grid_shape: Optional[Tuple[int, int]] = None
    feature_names: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        features = _frozen(self.features, np.float64)
        labels = _frozen(self.labels, np.int64).reshape(-1)
        if features.ndim != 2:
            raise DimensionError(f"features must be [N x D], got shape {features.shape}")
        if features.shape[0] != labels.shape[0]:
            raise DimensionError(
                f"{features.shape[0]} feature rows but {labels.shape[0]} labels")
        if self.num_classes < 2:
            raise ConfigError(f"a dataset needs at least 2 classes, got {self.num_classes}")
        if labels.size and (labels.min() < 0 or labels.max() >= self.num_classes):
            raise ConfigError(f"labels must lie in [0, {self.num_classes - 1}]")
        if self.grid_shape is not None and int(np.prod(self.grid_shape)) != features.shape[1]:
            raise DimensionError(
                f"grid shape {self.grid_shape} does not cover {features.shape[1]} features")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return int(self.features.shape[0])

    @property
    def input_dim(self) -> int:
        return int(self.features.shape[1])

    def example(self, index: int) -> Example:
        return Example(self.features[index], int(self.labels[index]))

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes)

    def checksum(self) -> str:
        digest = hashlib.sha256()
        digest.update(np.ascontiguousarray(self.features).tobytes())
        digest.update(np.ascontiguousarray(self.labels).tobytes())
        return digest.hexdigest()
