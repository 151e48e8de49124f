from typing import List, Optional

import numpy as np

from dstlab.exceptions import ConfigError
from dstlab.nn.layers import DenseLayer, Dropout, ReLU
from dstlab.nn.module import Module
from dstlab.nn.tensor import Tensor, as_tensor


class FeatureGenerator(Module):
    """MLP feature generator: ``depth`` blocks of Dense + ReLU (+ Dropout).

    The last block emits ``embedding_dim`` features; hidden blocks are
    ``hidden_dim`` wide.
    """

    def __init__(self, input_dim: int, embedding_dim: int, depth: int,
                 rng: np.random.Generator, hidden_dim: Optional[int] = None,
                 dropout_rate: float = 0.0, dropout_rng: Optional[np.random.Generator] = None):
        if depth < 1:
            raise ConfigError(f"feature generator depth must be >= 1, got {depth}")
        if embedding_dim < 1:
            raise ConfigError(f"embedding_dim must be positive, got {embedding_dim}")
        hidden_dim = hidden_dim or embedding_dim
        self.input_dim = input_dim
        self.embedding_dim = embedding_dim
        widths = [input_dim] + [hidden_dim] * (depth - 1) + [embedding_dim]
        self.layers: List[DenseLayer] = [
            DenseLayer(widths[i], widths[i + 1], rng) for i in range(depth)
        ]
        self.activation = ReLU()
        self.dropout = Dropout(dropout_rate, dropout_rng)

    def forward(self, x) -> Tensor:
        out = as_tensor(x)
        for layer in self.layers:
            out = self.dropout(self.activation(layer(out)))
        return out
