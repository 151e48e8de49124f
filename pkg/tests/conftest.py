import json
from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from dstlab.data.augment import AugmentationSpec
from dstlab.data.batching import BatchPlan, JointBatcher, StepViews, ViewMaker
from dstlab.data.generators import gen_gaussian_blobs, gen_two_moons
from dstlab.data.split import make_ssl_split
from dstlab.models.builder import Architecture
from dstlab.nn.tensor import Parameter


def numeric_grad(loss_fn: Callable[[], float], param: Parameter, eps: float = 1e-5) -> np.ndarray:
    """Central finite differences of ``loss_fn`` with respect to ``param``."""
    grad = np.zeros_like(param.data)
    for index in np.ndindex(param.data.shape):
        saved = param.data[index]
        param.data[index] = saved + eps
        plus = loss_fn()
        param.data[index] = saved - eps
        minus = loss_fn()
        param.data[index] = saved
        grad[index] = (plus - minus) / (2 * eps)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(np.linalg.norm(analytic) + np.linalg.norm(numeric), 1e-12)
    return float(np.linalg.norm(analytic - numeric) / scale)


@pytest.fixture
def fd_grad():
    return numeric_grad


@pytest.fixture
def rel_err():
    return relative_error


@pytest.fixture
def moons():
    return gen_two_moons(400, 0.1, seed=0)


@pytest.fixture
def moons_split(moons):
    return make_ssl_split(moons, k_per_class=4, eval_fraction=0.2,
                          include_labeled_in_unlabeled=True, seed=0)


@pytest.fixture
def blobs_split():
    dataset = gen_gaussian_blobs(3, 60, 0.4, [2.0, 2.0, 1.0], seed=1)
    return make_ssl_split(dataset, k_per_class=4, eval_fraction=0.2,
                          include_labeled_in_unlabeled=True, seed=0)


@pytest.fixture
def small_arch():
    return Architecture(input_dim=2, num_classes=2, embedding_dim=8, depth=2, head_dropout=0.0)


@pytest.fixture
def make_views(moons_split) -> Callable[..., StepViews]:
    """Factory for deterministic step views drawn from the moons split."""
    def factory(labeled_batch: int = 8, ratio: int = 2, seed: int = 0, count: int = 1):
        batcher = JointBatcher(moons_split, BatchPlan(labeled_batch, ratio, seed))
        maker = ViewMaker(AugmentationSpec(), seed)
        views = [maker(batcher.next_joint_batch()) for _ in range(count)]
        return views[0] if count == 1 else views
    return factory


@pytest.fixture
def base_config() -> dict:
    return {
        "name": "test",
        "seed": 0,
        "dataset": {"kind": "two_moons", "n": 200, "noise_sigma": 0.1, "seed": 0},
        "split": {"k_per_class": 4, "eval_fraction": 0.2},
        "model": {"embedding_dim": 8, "depth": 2, "head_dropout": 0.0},
        "algorithm": {"kind": "fixmatch"},
        "dst": {"warmup_steps_adv": 0},
        "batch": {"labeled_batch": 8, "unlabeled_ratio": 2},
        "total_steps": 20,
        "eval_every": 10,
        "metrics": {"charts": False},
    }


@pytest.fixture
def write_config(tmp_path) -> Callable[[dict, str], Path]:
    def writer(data: dict, name: str = "config.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return path
    return writer
