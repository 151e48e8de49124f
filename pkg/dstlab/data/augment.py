"""Weak and strong stochastic views of vector and grid examples."""
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from dstlab.data.dataset import Example


class Strength(str, Enum):
    WEAK = "weak"
    STRONG = "strong"


class WeakAugmentation(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    jitter_sigma: float = Field(0.05, ge=0.0)
    flip_prob: float = Field(0.5, ge=0.0, le=1.0)
    crop_pad: int = Field(2, ge=0)


class StrongAugmentation(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    jitter_sigma: float = Field(0.15, ge=0.0)
    scale_range: Tuple[float, float] = (0.8, 1.2)
    feature_drop_prob: float = Field(0.2, ge=0.0, le=1.0)
    flip_prob: float = Field(0.5, ge=0.0, le=1.0)
    crop_pad: int = Field(2, ge=0)
    cutout_frac: float = Field(0.25, ge=0.0, le=1.0)
    brightness_delta: float = Field(0.2, ge=0.0)

    @model_validator(mode="after")
    def check_scale_range(self):
        low, high = self.scale_range
        if low > high:
            raise ValueError(f"scale_range low {low} exceeds high {high}")
        return self


class AugmentationSpec(BaseModel):
    """Vector data uses the jitter/scale/drop fields, grid data the
    flip/crop/cutout/brightness fields."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    weak: WeakAugmentation = WeakAugmentation()
    strong: StrongAugmentation = StrongAugmentation()

    @model_validator(mode="after")
    def strong_is_harsher(self):
        if self.strong.jitter_sigma < self.weak.jitter_sigma:
            raise ValueError(
                f"strong jitter_sigma {self.strong.jitter_sigma} is below weak "
                f"jitter_sigma {self.weak.jitter_sigma}")
        return self


def _flip_and_crop(grid: np.ndarray, flip_prob: float, crop_pad: int,
                   rng: np.random.Generator) -> np.ndarray:
    if rng.random() < flip_prob:
        grid = grid[:, ::-1]
    if crop_pad:
        height, width = grid.shape
        padded = np.pad(grid, crop_pad)
        top, left = rng.integers(0, 2 * crop_pad + 1, size=2)
        grid = padded[top:top + height, left:left + width]
    return grid


def _cutout(grid: np.ndarray, frac: float, rng: np.random.Generator) -> np.ndarray:
    side = int(round(frac * min(grid.shape)))
    if side == 0:
        return grid
    height, width = grid.shape
    cy, cx = rng.integers(0, height), rng.integers(0, width)
    top, left = max(cy - side // 2, 0), max(cx - side // 2, 0)
    grid = grid.copy()
    grid[top:top + side, left:left + side] = 0.0
    return grid


def _augment_vector(x: np.ndarray, spec: AugmentationSpec, strength: Strength,
                    rng: np.random.Generator) -> np.ndarray:
    if strength == Strength.WEAK:
        return x + spec.weak.jitter_sigma * rng.standard_normal(x.shape)
    strong = spec.strong
    out = x + strong.jitter_sigma * rng.standard_normal(x.shape)
    out = out * rng.uniform(*strong.scale_range, size=x.shape)
    keep = rng.random(x.shape) >= strong.feature_drop_prob
    return np.where(keep, out, 0.0)


def _augment_grid(x: np.ndarray, spec: AugmentationSpec, strength: Strength,
                  rng: np.random.Generator, grid_shape: Tuple[int, int]) -> np.ndarray:
    grid = x.reshape(grid_shape)
    if strength == Strength.WEAK:
        grid = _flip_and_crop(grid, spec.weak.flip_prob, spec.weak.crop_pad, rng)
    else:
        strong = spec.strong
        grid = _flip_and_crop(grid, strong.flip_prob, strong.crop_pad, rng)
        grid = _cutout(grid, strong.cutout_frac, rng)
        grid = grid + rng.uniform(-strong.brightness_delta, strong.brightness_delta)
    return np.array(grid, dtype=np.float64).reshape(-1)


def augment(x: Union[Example, np.ndarray], spec: AugmentationSpec, strength: Strength,
            rng: np.random.Generator, grid_shape: Optional[Tuple[int, int]] = None) -> np.ndarray:
    """Return a fresh augmented copy of one example's features."""
    features = x.features if isinstance(x, Example) else x
    features = np.asarray(features, dtype=np.float64)
    strength = Strength(strength)
    if grid_shape is None:
        return _augment_vector(features, spec, strength, rng)
    return _augment_grid(features, spec, strength, rng, grid_shape)


def augment_batch(x: np.ndarray, spec: AugmentationSpec, strength: Strength,
                  rng: np.random.Generator, grid_shape: Optional[Tuple[int, int]] = None) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    strength = Strength(strength)
    if grid_shape is None:
        return _augment_vector(x, spec, strength, rng)
    return np.stack([_augment_grid(row, spec, strength, rng, grid_shape) for row in x])
