"""Activations, dropout and the softmax cross-entropy used by every head."""
from enum import Enum
from typing import Sequence, Union

import numpy as np

from dstlab.exceptions import ConfigError, ContractError, DimensionError, TargetIndexError
from dstlab.nn.tensor import Tensor, as_tensor, record

IGNORE_INDEX = -1
DEFAULT_CLAMP_EPS = 1e-7


class Mode(str, Enum):
    TRAIN = "train"
    EVAL = "eval"


def relu(x: Tensor) -> Tensor:
    x = as_tensor(x)
    mask = x.data > 0

    def _backward(grad):
        return (grad * mask,)

    return record(np.where(mask, x.data, 0.0), (x,), _backward)


def validate_dropout_rate(rate: float) -> float:
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must lie in [0, 1), got {rate}")
    return float(rate)


def dropout(x: Tensor, rate: float, mode: Mode, rng: np.random.Generator) -> Tensor:
    """Inverted dropout: survivors are scaled by 1/(1 - rate) in Train mode."""
    validate_dropout_rate(rate)
    x = as_tensor(x)
    if mode == Mode.EVAL or rate == 0.0:
        return x
    keep = rng.random(x.shape) >= rate
    mask = keep / (1.0 - rate)

    def _backward(grad):
        return (grad * mask,)

    return record(x.data * mask, (x,), _backward)


def log_softmax(logits: Union[Tensor, np.ndarray]) -> np.ndarray:
    z = logits.data if isinstance(logits, Tensor) else np.asarray(logits, dtype=np.float64)
    shifted = z - z.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def softmax(logits: Union[Tensor, np.ndarray]) -> np.ndarray:
    """Row-wise softmax as a plain array (never recorded)."""
    return np.exp(log_softmax(logits))


def _checked_targets(z: np.ndarray, targets: Sequence[int], reduction_denominator: int) -> np.ndarray:
    if z.ndim != 2:
        raise DimensionError(f"logits must be [B x K], got {z.shape}")
    batch, num_classes = z.shape
    if num_classes < 2:
        raise DimensionError(f"need at least 2 classes, got {num_classes}")
    targets = np.asarray(targets, dtype=np.int64).reshape(-1)
    if targets.shape[0] != batch:
        raise DimensionError(f"{targets.shape[0]} targets for {batch} logit rows")
    if np.any(targets >= num_classes) or np.any(targets < IGNORE_INDEX):
        bad = int(targets[(targets >= num_classes) | (targets < IGNORE_INDEX)][0])
        raise TargetIndexError(f"target {bad} outside [-1, {num_classes - 1}]")
    if reduction_denominator < 1:
        raise ContractError(f"reduction_denominator must be positive, got {reduction_denominator}")
    return targets


def softmax_cross_entropy(logits: Tensor, targets: Sequence[int],
                          reduction_denominator: int,
                          clamp_eps: float = DEFAULT_CLAMP_EPS) -> Tensor:
    """Sum of per-row CE over rows whose target is not -1, divided by
    ``reduction_denominator``.

    Probabilities are clamped to [clamp_eps, 1] before the log, which keeps
    the loss bounded by ln(1/clamp_eps) per row; a clamped row passes no
    gradient.
    """
    logits = as_tensor(logits)
    z = logits.data
    targets = _checked_targets(z, targets, reduction_denominator)

    log_probs = log_softmax(z)
    rows = np.flatnonzero(targets != IGNORE_INDEX)
    picked = log_probs[rows, targets[rows]]
    floor = np.log(clamp_eps)
    live = rows[picked >= floor]
    loss = (0.0 - np.maximum(picked, floor).sum()) / reduction_denominator

    def _backward(grad):
        out = np.zeros_like(z)
        if live.size:
            out[live] = np.exp(log_probs[live])
            out[live, targets[live]] -= 1.0
        return (out * (grad / reduction_denominator),)

    return record(np.array(loss), (logits,), _backward)


def complement_cross_entropy(logits: Tensor, targets: Sequence[int],
                             reduction_denominator: int,
                             clamp_eps: float = DEFAULT_CLAMP_EPS) -> Tensor:
    """Sum of per-row ``-log(1 - p_target)`` over rows whose target is not -1,
    divided by ``reduction_denominator``.

    Small when the target class is unlikely. ``1 - p_target`` is clamped to
    [clamp_eps, 1] like ``softmax_cross_entropy``; its gradient on a row
    fades to zero as ``p_target`` does.
    """
    logits = as_tensor(logits)
    z = logits.data
    targets = _checked_targets(z, targets, reduction_denominator)

    log_probs = log_softmax(z)
    rows = np.flatnonzero(targets != IGNORE_INDEX)
    others = log_probs[rows].copy()
    others[np.arange(rows.size), targets[rows]] = -np.inf
    top = others.max(axis=1, keepdims=True)
    log_rest = (top + np.log(np.exp(others - top).sum(axis=1, keepdims=True))).reshape(-1)
    floor = np.log(clamp_eps)
    keep = log_rest >= floor
    loss = (0.0 - np.maximum(log_rest, floor).sum()) / reduction_denominator

    def _backward(grad):
        out = np.zeros_like(z)
        live = rows[keep]
        if live.size:
            p_target = np.exp(log_probs[live, targets[live]])[:, None]
            out[live] = -p_target * np.exp(log_probs[live] - log_rest[keep][:, None])
            out[live, targets[live]] = p_target[:, 0]
        return (out * (grad / reduction_denominator),)

    return record(np.array(loss), (logits,), _backward)
