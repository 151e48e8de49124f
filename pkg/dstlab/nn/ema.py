"""Exponential moving average shadows (Mean Teacher style teachers)."""
import copy
from typing import Sequence

from dstlab.exceptions import ConfigError, ContractError
from dstlab.nn.module import Module
from dstlab.nn.tensor import Parameter

DEFAULT_EMA_DECAY = 0.999


class EmaShadow:
    """Frozen copy of a module whose parameters trail the live ones."""

    def __init__(self, model: Module, decay: float = DEFAULT_EMA_DECAY):
        if not 0.0 < decay < 1.0:
            raise ConfigError(f"EMA decay must lie in (0, 1), got {decay}")
        self.decay = decay
        self.module = copy.deepcopy(model)
        self.module.eval()
        for param in self.module.parameters():
            param.requires_grad = False
            param.grad = None

    def parameters(self):
        return self.module.parameters()


def ema_update(shadow: EmaShadow, params: Sequence[Parameter]) -> None:
    """shadow <- decay * shadow + (1 - decay) * params, elementwise."""
    targets = shadow.parameters()
    if len(targets) != len(params):
        raise ContractError(f"shadow tracks {len(targets)} tensors, got {len(params)}")
    for target, param in zip(targets, params):
        if target.data.shape != param.data.shape:
            raise ContractError(f"shadow shape {target.data.shape} != parameter shape {param.data.shape}")
        target.data *= shadow.decay
        target.data += (1.0 - shadow.decay) * param.data
