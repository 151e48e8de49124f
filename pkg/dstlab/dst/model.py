"""The debiased model: ``psi`` with main, pseudo and worst-case heads."""
from typing import Optional

from dstlab.models.base import MAIN_HEAD, ModelBundle
from dstlab.models.builder import Architecture, build_model
from dstlab.models.heads import HeadKind

PSEUDO_HEAD = "h_pseudo"
WORST_HEAD = "h_worst"


class DstModel(ModelBundle):
    """Three heads with pairwise disjoint parameters on one ``psi``.

    Only ``psi`` and ``h`` are used for inference; the auxiliary heads can be
    dropped with ``without_auxiliary_heads`` without changing predictions.
    """

    @property
    def h_pseudo(self):
        return self.heads[PSEUDO_HEAD]

    @property
    def h_worst(self):
        return self.heads.get(WORST_HEAD)

    @property
    def has_worst_head(self) -> bool:
        return WORST_HEAD in self.heads

    def main_parameters(self) -> list:
        """Parameters the descent phase updates: psi, h and h_pseudo."""
        return self.parameters_of((MAIN_HEAD, PSEUDO_HEAD))

    def worst_parameters(self) -> list:
        return self.head(WORST_HEAD).parameters() if self.has_worst_head else []

    def without_auxiliary_heads(self) -> ModelBundle:
        return self.inference_bundle()


def build_dst_model(arch: Architecture, seed: int, main_head: HeadKind = HeadKind.LINEAR,
                    pseudo_head: HeadKind = HeadKind.NONLINEAR,
                    worst_head: Optional[HeadKind] = HeadKind.NONLINEAR,
                    tag: str = "") -> DstModel:
    """``worst_head=None`` builds the variant without a worst-case head."""
    heads = {MAIN_HEAD: main_head, PSEUDO_HEAD: pseudo_head}
    if worst_head is not None:
        heads[WORST_HEAD] = worst_head
    bundle = build_model(arch, heads, seed, tag)
    return DstModel(bundle.psi, bundle.heads)
