from dstlab.dst.config import AdversaryLoss, Alternation, DstConfig, DstOptions
from dstlab.dst.losses import (CoreLosses, adversarial_term, adversarial_weight,
                               adversary_objective, adversary_skip_reason, dst_core_losses,
                               worst_disagreement)
from dstlab.dst.model import PSEUDO_HEAD, WORST_HEAD, DstModel, build_dst_model
from dstlab.dst.trainer import (DescentObjective, DstOptimizers, descent_objective,
                                dst_train_step, worst_ascent_step, worst_update_step)

__all__ = [
    "AdversaryLoss",
    "Alternation",
    "CoreLosses",
    "DescentObjective",
    "DstConfig",
    "DstModel",
    "DstOptimizers",
    "DstOptions",
    "PSEUDO_HEAD",
    "WORST_HEAD",
    "adversarial_term",
    "adversarial_weight",
    "adversary_objective",
    "adversary_skip_reason",
    "build_dst_model",
    "descent_objective",
    "dst_core_losses",
    "dst_train_step",
    "worst_ascent_step",
    "worst_disagreement",
    "worst_update_step",
]
