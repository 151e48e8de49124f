from enum import Enum
from typing import List, Optional

import numpy as np

from dstlab.nn.layers import DenseLayer, Dropout, ReLU
from dstlab.nn.module import Module
from dstlab.nn.tensor import Tensor


class HeadKind(str, Enum):
    LINEAR = "linear"
    NONLINEAR = "nonlinear"


class Head(Module):
    """Classifier head emitting logits (softmax lives in the loss).

    Linear:    Dense
    Nonlinear: Dense - ReLU - Dropout - Dense
    """

    def __init__(self, kind: HeadKind, in_dim: int, num_classes: int,
                 rng: np.random.Generator, projection_dim: Optional[int] = None,
                 dropout_rate: float = 0.0, dropout_rng: Optional[np.random.Generator] = None):
        self.kind = HeadKind(kind)
        self.num_classes = num_classes
        self.projection_dim = projection_dim or 2 * in_dim
        if self.kind == HeadKind.LINEAR:
            self.layers: List[DenseLayer] = [DenseLayer(in_dim, num_classes, rng)]
        else:
            self.layers = [
                DenseLayer(in_dim, self.projection_dim, rng),
                DenseLayer(self.projection_dim, num_classes, rng),
            ]
        self.activation = ReLU()
        self.dropout = Dropout(dropout_rate, dropout_rng)

    @property
    def dropout_rate(self) -> float:
        return self.dropout.rate

    def forward(self, features: Tensor) -> Tensor:
        if self.kind == HeadKind.LINEAR:
            return self.layers[0](features)
        hidden = self.dropout(self.activation(self.layers[0](features)))
        return self.layers[1](hidden)

    def __repr__(self):
        return f"Head(kind={self.kind.value}, layers={self.layers})"
