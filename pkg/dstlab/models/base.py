from typing import Dict, Iterable, Union

import numpy as np

from dstlab.exceptions import ContractError
from dstlab.models.backbone import FeatureGenerator
from dstlab.models.heads import Head
from dstlab.nn.functional import softmax
from dstlab.nn.module import Module
from dstlab.nn.tensor import Tensor, as_tensor, no_grad

MAIN_HEAD = "h"


class ModelBundle(Module):
    """Feature generator plus named, independently parameterised heads.

    The inference path is always ``psi`` followed by the main head ``h``.
    """

    def __init__(self, psi: FeatureGenerator, heads: Dict[str, Head]):
        if MAIN_HEAD not in heads:
            raise ContractError("a model bundle needs a main head named 'h'")
        self.psi = psi
        self.heads = dict(heads)
        self._check_disjoint()

    def _check_disjoint(self) -> None:
        seen = set()
        for name, head in self.heads.items():
            for param in head.parameters():
                if id(param) in seen or id(param.data) in seen:
                    raise ContractError(f"head '{name}' shares parameters with another head")
                seen.add(id(param))
                seen.add(id(param.data))

    @property
    def h(self) -> Head:
        return self.heads[MAIN_HEAD]

    def head(self, name: str) -> Head:
        try:
            return self.heads[name]
        except KeyError as e:
            raise ContractError(f"model has no head '{name}'") from e

    def head_parameters(self, *names: str) -> list:
        return [param for name in names for param in self.head(name).parameters()]

    def logits(self, x: Union[Tensor, np.ndarray], head: str = MAIN_HEAD) -> Tensor:
        return self.head(head)(self.psi(as_tensor(x)))

    def forward(self, x) -> Tensor:
        return self.logits(x)

    def predict_proba(self, x: np.ndarray, head: str = MAIN_HEAD) -> np.ndarray:
        """Eval-mode class probabilities; never recorded on a tape."""
        with self.evaluating(), no_grad():
            return softmax(self.logits(x, head))

    def predict(self, x: np.ndarray, head: str = MAIN_HEAD) -> np.ndarray:
        """Eval-mode argmax, ties going to the lowest class index."""
        return np.argmax(self.predict_proba(x, head), axis=1)

    def inference_bundle(self) -> "ModelBundle":
        """View over ``psi`` and ``h`` only, sharing their parameters."""
        return ModelBundle(self.psi, {MAIN_HEAD: self.h})

    def parameters_of(self, names: Iterable[str], include_psi: bool = True) -> list:
        params = list(self.psi.parameters()) if include_psi else []
        return params + self.head_parameters(*names)

    def __repr__(self):
        return f"<{type(self).__name__}(heads={sorted(self.heads)}, embedding_dim={self.psi.embedding_dim})>"


def parameters_changed(before: Dict[str, np.ndarray], model: Module) -> Dict[str, bool]:
    after = model.state_dict()
    return {name: not np.array_equal(before[name], after[name]) for name in before}


def freeze(model: Module) -> Module:
    for param in model.parameters():
        param.requires_grad = False
        param.grad = None
    return model


__all__ = ["MAIN_HEAD", "ModelBundle", "freeze", "parameters_changed"]
