"""Loss terms of debiased self-training.

``h`` only ever sees clean labels; ``h_pseudo`` is the only head trained on
pseudo labels. psi descends the adversarial term
``T = L_U(psi, h_worst) - L_L(psi, h_worst)`` while the worst-case head
``h_worst`` pushes it up, by ascent on T or through a bounded surrogate.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from dstlab.data.batching import StepViews
from dstlab.dst.config import AdversaryLoss, DstConfig
from dstlab.dst.model import PSEUDO_HEAD, WORST_HEAD, DstModel
from dstlab.exceptions import ContractError
from dstlab.models.base import MAIN_HEAD, ModelBundle
from dstlab.nn.functional import (DEFAULT_CLAMP_EPS, complement_cross_entropy,
                                  softmax_cross_entropy)
from dstlab.nn.tensor import Tensor, no_grad
from dstlab.selftrain.pseudo import (PseudoBatchRecord, PseudoLabelPolicy, pseudo_label,
                                     supervised_loss, unlabeled_loss)


@dataclass
class CoreLosses:
    loss_sup: Tensor
    loss_pseudo: Optional[Tensor]
    record: PseudoBatchRecord

    @property
    def pseudo_value(self) -> float:
        return self.loss_pseudo.item() if self.loss_pseudo is not None else 0.0


def dst_core_losses(model: DstModel, views: StepViews, policy: PseudoLabelPolicy,
                    clamp_eps: float = DEFAULT_CLAMP_EPS,
                    record: Optional[PseudoBatchRecord] = None,
                    pseudo_source: Optional[ModelBundle] = None) -> CoreLosses:
    """L_sup on ``h`` and L_pseudo on ``h_pseudo``.

    Pseudo labels come from ``pseudo_source``'s main head (the model itself by
    default) unless a ready ``record`` is passed. ``loss_pseudo`` is None when
    nothing was retained.
    """
    if record is None:
        record = pseudo_label(pseudo_source or model, views.unlabeled_weak, policy, MAIN_HEAD)
    loss_sup = supervised_loss(model, views.labeled_weak, views.labeled_y, MAIN_HEAD, clamp_eps)
    loss_pseudo = None
    if record.retained_count:
        loss_pseudo = unlabeled_loss(model, PSEUDO_HEAD, record, views.unlabeled_strong, clamp_eps)
    return CoreLosses(loss_sup, loss_pseudo, record)


def adversarial_term(model: DstModel, views: StepViews, record: PseudoBatchRecord,
                     clamp_eps: float = DEFAULT_CLAMP_EPS, detach_features: bool = False,
                     detach_labeled_from_psi: bool = False) -> Tensor:
    """T = L_U(psi, h_worst, pseudo labels) - L_L(psi, h_worst) on strong unlabeled views.

    ``detach_features`` computes both feature batches as constants, so only
    ``h_worst`` is on the graph. ``detach_labeled_from_psi`` cuts ``psi`` out
    of the labeled term only.
    """
    if len(record) != views.unlabeled_strong.shape[0]:
        raise ContractError("pseudo-label record does not match the unlabeled batch")
    worst = model.head(WORST_HEAD)
    if detach_features:
        with no_grad():
            feats_u = model.psi(views.unlabeled_strong)
            feats_l = model.psi(views.labeled_weak)
    else:
        feats_u = model.psi(views.unlabeled_strong)
        feats_l = model.psi(views.labeled_weak)
        if detach_labeled_from_psi:
            feats_l = feats_l.detach()
    y = np.asarray(views.labeled_y)
    loss_u = softmax_cross_entropy(worst(feats_u), record.targets, len(record), clamp_eps)
    loss_l = softmax_cross_entropy(worst(feats_l), y, y.shape[0], clamp_eps)
    return loss_u - loss_l


def adversary_objective(model: DstModel, views: StepViews, record: PseudoBatchRecord,
                        loss: AdversaryLoss = AdversaryLoss.BOUNDED,
                        clamp_eps: float = DEFAULT_CLAMP_EPS) -> Tensor:
    """What ``h_worst`` minimises, on constant features.

    ``cross_entropy``: -T. ``bounded``: L_L(h_worst) plus the mean of
    ``-log(1 - p_worst[pseudo label])`` over the unlabeled batch, which drops
    to zero on every pseudo label the head already contradicts.
    """
    if AdversaryLoss(loss) == AdversaryLoss.CROSS_ENTROPY:
        return -adversarial_term(model, views, record, clamp_eps, detach_features=True)
    if len(record) != views.unlabeled_strong.shape[0]:
        raise ContractError("pseudo-label record does not match the unlabeled batch")
    worst = model.head(WORST_HEAD)
    with no_grad():
        feats_u = model.psi(views.unlabeled_strong)
        feats_l = model.psi(views.labeled_weak)
    y = np.asarray(views.labeled_y)
    loss_l = softmax_cross_entropy(worst(feats_l), y, y.shape[0], clamp_eps)
    loss_u = complement_cross_entropy(worst(feats_u), record.targets, len(record), clamp_eps)
    return loss_l + loss_u


def adversarial_weight(config: DstConfig, step: int) -> float:
    """Weight of T in the objective of psi: 0 during warmup, then a linear
    ramp to ``adv_weight`` over ``adv_ramp_steps``."""
    if step < config.warmup_steps_adv:
        return 0.0
    if config.adv_ramp_steps <= 0:
        return config.adv_weight
    return config.adv_weight * min(1.0, (step - config.warmup_steps_adv + 1) / config.adv_ramp_steps)


def adversary_skip_reason(model: DstModel, config: DstConfig, step: int,
                          record: PseudoBatchRecord) -> Optional[str]:
    """Why the adversarial term is left out this step, or None when it runs."""
    if not config.worst_case or not model.has_worst_head:
        return "disabled"
    if step < config.warmup_steps_adv:
        return "warmup"
    if config.adv_skip_when_empty and record.retained_count == 0:
        return "no_retained_pseudo_labels"
    return None


def worst_disagreement(model: DstModel, x_strong: np.ndarray,
                       record: PseudoBatchRecord) -> Optional[float]:
    """Share of retained pseudo labels the worst head (Eval mode) contradicts."""
    if record.retained_count == 0 or not model.has_worst_head:
        return None
    worst_pred = model.predict(x_strong, WORST_HEAD)
    retained = record.retained
    return float(np.mean(worst_pred[retained] != record.predicted_class[retained]))
