"""Single optimisation steps of the baseline self-training algorithms.

Every step labels the unlabeled batch first (Eval mode, no tape), then runs
one tape for the trainable objective. The unlabeled term is only built when
it can contribute: ``lam > 0`` and at least one pseudo label retained. An
empty unlabeled term therefore leaves no gradient buffers behind and the
step is exactly the supervised one.
"""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import structlog

from dstlab.data.batching import StepViews
from dstlab.models.base import MAIN_HEAD, ModelBundle
from dstlab.nn.ema import EmaShadow, ema_update
from dstlab.nn.functional import DEFAULT_CLAMP_EPS
from dstlab.nn.optim import SgdOptimizer
from dstlab.nn.tensor import Tape, Tensor, backward
from dstlab.selftrain.pseudo import (PseudoBatchRecord, PseudoLabelPolicy, pseudo_label,
                                     supervised_loss, unlabeled_loss)

logger = structlog.get_logger()


@dataclass
class StepMetrics:
    step: int
    loss_sup: float
    lr: float
    unlabeled_size: int = 0
    loss_pseudo: Optional[float] = None
    loss_adv: Optional[float] = None
    record: Optional[PseudoBatchRecord] = None
    worst_disagreement: Optional[float] = None

    @property
    def retained_count(self) -> int:
        return self.record.retained_count if self.record is not None else 0

    def losses(self) -> dict:
        return {"loss_sup": self.loss_sup, "loss_pseudo": self.loss_pseudo,
                "loss_adv": self.loss_adv}


def descend(optimizer: SgdOptimizer, loss: Tensor, step: int) -> float:
    optimizer.zero_grad()
    backward(loss)
    return optimizer.step(step)


def ramped_lambda(lam: float, step: int, warmup_steps: int) -> float:
    """Linear ramp of the unlabeled weight from 0 to ``lam`` over ``warmup_steps``."""
    if warmup_steps <= 0:
        return lam
    return lam * min(1.0, step / warmup_steps)


def supervised_step(model: ModelBundle, views: StepViews, optimizer: SgdOptimizer, step: int,
                    clamp_eps: float = DEFAULT_CLAMP_EPS) -> StepMetrics:
    with Tape():
        loss = supervised_loss(model, views.labeled_weak, views.labeled_y, clamp_eps=clamp_eps)
        lr = descend(optimizer, loss, step)
    return StepMetrics(step=step, loss_sup=loss.item(), lr=lr)


def self_training_step(model: ModelBundle, views: StepViews, record: PseudoBatchRecord,
                       lam: float, optimizer: SgdOptimizer, step: int,
                       head: str = MAIN_HEAD, pseudo_head: Optional[str] = None,
                       unlabeled_x: Optional[np.ndarray] = None,
                       clamp_eps: float = DEFAULT_CLAMP_EPS) -> StepMetrics:
    """One step on L_L(psi, head) + lam * L_U(psi, pseudo_head, record)."""
    pseudo_head = pseudo_head or head
    unlabeled_x = views.unlabeled_strong if unlabeled_x is None else unlabeled_x
    loss_pseudo = None
    with Tape():
        total = loss_sup = supervised_loss(model, views.labeled_weak, views.labeled_y, head, clamp_eps)
        if lam > 0 and record.retained_count:
            loss_pseudo = unlabeled_loss(model, pseudo_head, record, unlabeled_x, clamp_eps)
            total = total + lam * loss_pseudo
        lr = descend(optimizer, total, step)
    return StepMetrics(
        step=step, loss_sup=loss_sup.item(), lr=lr, unlabeled_size=len(record),
        loss_pseudo=loss_pseudo.item() if loss_pseudo is not None else 0.0, record=record)


def pseudo_label_step(model: ModelBundle, views: StepViews, policy: PseudoLabelPolicy, lam: float,
                      optimizer: SgdOptimizer, step: int,
                      clamp_eps: float = DEFAULT_CLAMP_EPS) -> StepMetrics:
    """Classic pseudo labeling: labels and training both on weak views."""
    record = pseudo_label(model, views.unlabeled_weak, policy)
    return self_training_step(model, views, record, lam, optimizer, step,
                              unlabeled_x=views.unlabeled_weak, clamp_eps=clamp_eps)


def fixmatch_step(model: ModelBundle, views: StepViews, policy: PseudoLabelPolicy, lam: float,
                  optimizer: SgdOptimizer, step: int,
                  clamp_eps: float = DEFAULT_CLAMP_EPS) -> StepMetrics:
    """Weak-view labels from ``h`` supervise ``h`` itself on strong views."""
    record = pseudo_label(model, views.unlabeled_weak, policy)
    return self_training_step(model, views, record, lam, optimizer, step, clamp_eps=clamp_eps)


def mean_teacher_step(student: ModelBundle, teacher: EmaShadow, views: StepViews,
                      policy: PseudoLabelPolicy, lam: float, optimizer: SgdOptimizer, step: int,
                      clamp_eps: float = DEFAULT_CLAMP_EPS) -> StepMetrics:
    record = pseudo_label(teacher.module, views.unlabeled_weak, policy)
    metrics = self_training_step(student, views, record, lam, optimizer, step, clamp_eps=clamp_eps)
    ema_update(teacher, student.parameters())
    return metrics


def mutual_learning_step(model: ModelBundle, views: StepViews, policy: PseudoLabelPolicy,
                         lam: float, optimizer: SgdOptimizer, step: int,
                         heads: Sequence[str] = (MAIN_HEAD, "h_b"),
                         clamp_eps: float = DEFAULT_CLAMP_EPS) -> StepMetrics:
    """Each head's retained labels train the other head; both fit labeled data."""
    head_a, head_b = heads
    record_a = pseudo_label(model, views.unlabeled_weak, policy, head_a)
    record_b = pseudo_label(model, views.unlabeled_weak, policy, head_b)
    loss_pseudo = 0.0
    with Tape():
        loss_sup = supervised_loss(model, views.labeled_weak, views.labeled_y, head_a, clamp_eps)
        total = loss_sup + supervised_loss(model, views.labeled_weak, views.labeled_y, head_b, clamp_eps)
        if lam > 0:
            for teacher_record, student_head in ((record_a, head_b), (record_b, head_a)):
                if teacher_record.retained_count:
                    term = unlabeled_loss(model, student_head, teacher_record,
                                          views.unlabeled_strong, clamp_eps)
                    loss_pseudo += term.item()
                    total = total + lam * term
        lr = descend(optimizer, total, step)
    return StepMetrics(step=step, loss_sup=loss_sup.item(), lr=lr, unlabeled_size=len(record_a),
                       loss_pseudo=loss_pseudo, record=record_a)
