"""SGD with momentum, learning-rate schedules and gradient clipping."""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from dstlab.exceptions import ConfigError, DimensionError
from dstlab.nn.tensor import Parameter


class ScheduleKind(str, Enum):
    CONSTANT = "constant"
    COSINE = "cosine"


@dataclass(frozen=True)
class LrSchedule:
    kind: ScheduleKind = ScheduleKind.CONSTANT
    total_steps: Optional[int] = None

    def __post_init__(self):
        if self.kind == ScheduleKind.COSINE and (self.total_steps is None or self.total_steps < 1):
            raise ConfigError("cosine schedule needs total_steps >= 1")

    @classmethod
    def constant(cls) -> "LrSchedule":
        return cls(ScheduleKind.CONSTANT)

    @classmethod
    def cosine(cls, total_steps: int) -> "LrSchedule":
        return cls(ScheduleKind.COSINE, total_steps)

    def lr_at(self, lr0: float, step: int) -> float:
        if self.kind == ScheduleKind.CONSTANT:
            return lr0
        progress = min(max(step, 0), self.total_steps) / self.total_steps
        return lr0 * 0.5 * (1.0 + math.cos(math.pi * progress))


class SgdOptimizer:
    """Momentum SGD. Parameters without a gradient this step are left alone,
    including their momentum and weight decay."""

    def __init__(self, params: Iterable[Parameter], lr0: float, momentum: float = 0.9,
                 weight_decay: float = 0.0, schedule: LrSchedule = LrSchedule.constant(),
                 grad_clip: Optional[float] = None):
        if lr0 <= 0:
            raise ConfigError(f"lr0 must be positive, got {lr0}")
        if not 0.0 <= momentum < 1.0:
            raise ConfigError(f"momentum must lie in [0, 1), got {momentum}")
        if weight_decay < 0:
            raise ConfigError(f"weight_decay must be non-negative, got {weight_decay}")
        self.params: List[Parameter] = list(params)
        self.lr0 = lr0
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.schedule = schedule
        self.grad_clip = grad_clip
        self.velocity: Dict[int, np.ndarray] = {id(p): np.zeros_like(p.data) for p in self.params}

    def lr(self, step_index: int) -> float:
        return self.schedule.lr_at(self.lr0, step_index)

    def zero_grad(self) -> None:
        for param in self.params:
            param.grad = None

    def step(self, step_index: int) -> float:
        """Clip (when configured) and apply one update; returns the lr used."""
        if self.grad_clip is not None:
            clip_grad_norm(self.params, self.grad_clip)
        sgd_step(self, self.params, [p.grad for p in self.params], step_index)
        return self.lr(step_index)


def sgd_step(opt: SgdOptimizer, params: Sequence[Parameter],
             grads: Sequence[Optional[np.ndarray]], step_index: int) -> None:
    """v <- momentum * v + g + weight_decay * p;  p <- p - lr(t) * v."""
    lr = opt.lr(step_index)
    for param, grad in zip(params, grads):
        if grad is None:
            continue
        if grad.shape != param.data.shape:
            raise DimensionError(f"gradient shape {grad.shape} != parameter shape {param.data.shape}")
        velocity = opt.velocity.setdefault(id(param), np.zeros_like(param.data))
        velocity *= opt.momentum
        velocity += grad + opt.weight_decay * param.data
        param.data -= lr * velocity


def global_grad_norm(params: Sequence[Parameter]) -> float:
    total = 0.0
    for param in params:
        if param.grad is not None:
            total += float(np.sum(param.grad * param.grad))
    return math.sqrt(total)


def clip_grad_norm(params: Sequence[Parameter], max_norm: float) -> float:
    """Rescale all gradients together so their global L2 norm is <= max_norm."""
    norm = global_grad_norm(params)
    if norm > max_norm:
        scale = max_norm / norm
        for param in params:
            if param.grad is not None:
                param.grad = param.grad * scale
    return norm
