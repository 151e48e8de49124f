"""Dense building blocks."""
from typing import Optional

import numpy as np

from dstlab.exceptions import DimensionError
from dstlab.nn.functional import dropout, relu, validate_dropout_rate
from dstlab.nn.module import Module
from dstlab.nn.tensor import Parameter, Tensor, as_tensor


def he_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


class DenseLayer(Module):
    """out = x @ W + b with W of shape [in_dim x out_dim]."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        if in_dim < 1 or out_dim < 1:
            raise DimensionError(f"dense layer dims must be positive, got {in_dim}x{out_dim}")
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.weight = Parameter(he_uniform(rng, in_dim, out_dim), name="weight")
        self.bias = Parameter(np.zeros(out_dim), name="bias")

    def forward(self, x: Tensor) -> Tensor:
        return forward_dense(x, self)

    def __repr__(self):
        return f"DenseLayer({self.in_dim}, {self.out_dim})"


def forward_dense(x: Tensor, layer: DenseLayer) -> Tensor:
    x = as_tensor(x)
    if x.data.ndim != 2 or x.shape[-1] != layer.in_dim:
        raise DimensionError(f"expected input [B x {layer.in_dim}], got {x.shape}")
    return x @ layer.weight + layer.bias


class Dropout(Module):
    """Dropout with a private random stream; identity in Eval mode."""

    def __init__(self, rate: float, rng: Optional[np.random.Generator] = None):
        self.rate = validate_dropout_rate(rate)
        self.rng = rng if rng is not None else np.random.default_rng(0)

    def forward(self, x: Tensor) -> Tensor:
        return dropout(x, self.rate, self.mode, self.rng)


class ReLU(Module):
    def forward(self, x: Tensor) -> Tensor:
        return relu(x)
