"""Synthetic desk-scale datasets.

Two moons and the blobs come from scikit-learn's toy generators; rings are
drawn directly. Every generator is a pure function of its arguments.
"""
from typing import Optional, Sequence

import numpy as np
import structlog
from sklearn.datasets import make_blobs, make_moons

from dstlab.data.dataset import Dataset
from dstlab.exceptions import ConfigError

logger = structlog.get_logger()


def gen_two_moons(n: int, noise_sigma: float, seed: int) -> Dataset:
    """``n/2`` points per interleaved half-circle; class 0 is the upper moon."""
    if n < 4:
        raise ConfigError(f"two_moons needs n >= 4, got {n}")
    if n % 2:
        raise ConfigError(f"two_moons needs an even n, got {n}")
    if noise_sigma < 0:
        raise ConfigError(f"noise_sigma must be non-negative, got {noise_sigma}")
    features, labels = make_moons(n_samples=n, noise=noise_sigma or None,
                                  shuffle=True, random_state=seed)
    return Dataset(features, labels, num_classes=2, name="two_moons")


def blob_centers(num_classes: int, class_distance_profile: Sequence[float]) -> np.ndarray:
    """Class ``k`` sits at distance ``profile[k]`` from the origin, angle 2*pi*k/K."""
    profile = np.asarray(class_distance_profile, dtype=np.float64)
    angles = 2.0 * np.pi * np.arange(num_classes) / num_classes
    return np.stack([profile * np.cos(angles), profile * np.sin(angles)], axis=1)


def gen_gaussian_blobs(num_classes: int, n_per_class: int, spread: float,
                       class_distance_profile: Optional[Sequence[float]], seed: int) -> Dataset:
    if num_classes < 2:
        raise ConfigError(f"blobs need K >= 2, got {num_classes}")
    if n_per_class < 1:
        raise ConfigError(f"n_per_class must be positive, got {n_per_class}")
    if spread <= 0:
        raise ConfigError(f"spread must be positive, got {spread}")
    if class_distance_profile is None:
        class_distance_profile = [1.0] * num_classes
    if len(class_distance_profile) != num_classes:
        raise ConfigError(
            f"class_distance_profile has {len(class_distance_profile)} entries for K={num_classes}")
    centers = blob_centers(num_classes, class_distance_profile)
    features, labels = make_blobs(n_samples=[n_per_class] * num_classes, centers=centers,
                                  cluster_std=spread, shuffle=True, random_state=seed)
    return Dataset(features, labels, num_classes=num_classes, name="blobs")


def gen_rings(num_classes: int, n_per_class: int, noise: float, seed: int) -> Dataset:
    """Concentric annuli; class ``k`` has radius ``k + 1``."""
    if num_classes < 2:
        raise ConfigError(f"rings need K >= 2, got {num_classes}")
    if n_per_class < 1:
        raise ConfigError(f"n_per_class must be positive, got {n_per_class}")
    if noise < 0:
        raise ConfigError(f"noise must be non-negative, got {noise}")
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(num_classes), n_per_class)
    angles = rng.uniform(0.0, 2.0 * np.pi, size=labels.size)
    radii = labels + 1.0 + noise * rng.standard_normal(labels.size)
    features = np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=1)
    order = rng.permutation(labels.size)
    return Dataset(features[order], labels[order], num_classes=num_classes, name="rings")
