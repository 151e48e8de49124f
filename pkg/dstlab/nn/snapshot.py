"""Byte-exact parameter snapshots (previous-round teachers)."""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from dstlab.exceptions import ContractError
from dstlab.nn.module import Module


@dataclass(frozen=True)
class ParamSnapshot:
    names: Tuple[str, ...]
    arrays: Tuple[np.ndarray, ...]

    def __len__(self):
        return len(self.names)


def snapshot_params(model: Module) -> ParamSnapshot:
    named = list(model.named_parameters())
    return ParamSnapshot(
        names=tuple(name for name, _ in named),
        arrays=tuple(param.data.copy() for _, param in named),
    )


def restore_params(model: Module, snapshot: ParamSnapshot) -> None:
    named = list(model.named_parameters())
    if len(named) != len(snapshot):
        raise ContractError(f"snapshot holds {len(snapshot)} tensors, model has {len(named)}")
    for (name, param), saved_name, array in zip(named, snapshot.names, snapshot.arrays):
        if name != saved_name or param.data.shape != array.shape:
            raise ContractError(f"snapshot entry {saved_name}{array.shape} does not match {name}{param.data.shape}")
        param.data[...] = array
