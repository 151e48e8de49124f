"""The alternating min-max step of debiased self-training."""
from dataclasses import dataclass
from typing import Optional

import structlog

from dstlab.data.batching import StepViews
from dstlab.dst.config import Alternation, DstConfig
from dstlab.dst.losses import (CoreLosses, adversarial_term, adversarial_weight,
                               adversary_objective, adversary_skip_reason, dst_core_losses,
                               worst_disagreement)
from dstlab.dst.model import DstModel
from dstlab.models.base import ModelBundle
from dstlab.nn.optim import LrSchedule, SgdOptimizer
from dstlab.nn.tensor import Tape, Tensor, backward
from dstlab.selftrain.pseudo import PseudoBatchRecord, PseudoLabelPolicy, pseudo_label
from dstlab.selftrain.steps import StepMetrics, descend

logger = structlog.get_logger()


@dataclass
class DstOptimizers:
    main: SgdOptimizer
    worst: Optional[SgdOptimizer] = None

    @classmethod
    def build(cls, model: DstModel, lr0: float, momentum: float, weight_decay: float,
              schedule: LrSchedule, grad_clip: Optional[float]) -> "DstOptimizers":
        """Separate optimizer for ``h_worst`` with the main learning rate."""
        def make(params):
            return SgdOptimizer(params, lr0, momentum, weight_decay, schedule, grad_clip)

        worst = make(model.worst_parameters()) if model.has_worst_head else None
        return cls(make(model.main_parameters()), worst)


def _keep_only_worst_grads(model: DstModel, optimizer_worst: SgdOptimizer) -> None:
    worst_ids = {id(p) for p in optimizer_worst.params}
    for param in model.parameters():
        if id(param) not in worst_ids:
            param.grad = None


def worst_update_step(model: DstModel, objective: Tensor, optimizer_worst: SgdOptimizer,
                      step: int) -> float:
    """Descend ``objective`` with ``h_worst`` alone; gradients it leaves on
    psi, h or h_pseudo are dropped."""
    optimizer_worst.zero_grad()
    backward(objective)
    _keep_only_worst_grads(model, optimizer_worst)
    return optimizer_worst.step(step)


def worst_ascent_step(model: DstModel, T: Tensor, optimizer_worst: SgdOptimizer, step: int) -> float:
    """Gradient ascent on ``T`` for ``h_worst`` (descent on -T)."""
    return worst_update_step(model, -T, optimizer_worst, step)


def _discard_grads(params) -> None:
    for param in params:
        param.grad = None


@dataclass
class DescentObjective:
    core: CoreLosses
    total: Tensor
    adv: Optional[Tensor] = None


def descent_objective(model: DstModel, views: StepViews, policy: PseudoLabelPolicy,
                      record: PseudoBatchRecord, config: DstConfig, lam: float,
                      adv_weight: Optional[float]) -> DescentObjective:
    """L_sup + lam * L_pseudo + adv_weight * T; T is left out when ``adv_weight`` is None."""
    core = dst_core_losses(model, views, policy, config.clamp_eps, record=record)
    total = core.loss_sup
    if lam > 0 and core.loss_pseudo is not None:
        total = total + lam * core.loss_pseudo
    adv = None
    if adv_weight is not None:
        adv = adversarial_term(model, views, record, config.clamp_eps,
                               detach_labeled_from_psi=config.detach_labeled_from_psi)
        if adv_weight > 0:
            total = total + adv_weight * adv
    return DescentObjective(core, total, adv)


def dst_train_step(model: DstModel, views: StepViews, config: DstConfig,
                   optimizers: DstOptimizers, step: int,
                   policy: Optional[PseudoLabelPolicy] = None,
                   record: Optional[PseudoBatchRecord] = None,
                   pseudo_source: Optional[ModelBundle] = None,
                   lam: Optional[float] = None) -> StepMetrics:
    """One min-max step on L_sup + lam * L_pseudo + w * T.

    TwoStep: update ``h_worst`` on constant features first, then recompute
    everything and descend psi, h and h_pseudo, discarding the gradients T
    leaves on ``h_worst``. GradientReversal: one forward tape, both updates
    from the same parameters. ``w`` follows ``adversarial_weight``.
    """
    policy = policy or PseudoLabelPolicy(config.tau)
    lam = config.lam if lam is None else lam
    if record is None:
        record = pseudo_label(pseudo_source or model, views.unlabeled_weak, policy)

    reason = adversary_skip_reason(model, config, step, record)
    if reason is not None:
        logger.debug("Adversarial term skipped", step=step, reason=reason)
    active = reason is None
    weight = adversarial_weight(config, step) if active else None
    disagreement = None

    if config.alternation == Alternation.TWO_STEP:
        if active:
            with Tape():
                adversary = adversary_objective(model, views, record, config.adversary_loss,
                                                config.clamp_eps)
                worst_update_step(model, adversary, optimizers.worst, step)
            disagreement = worst_disagreement(model, views.unlabeled_strong, record)
        with Tape():
            objective = descent_objective(model, views, policy, record, config, lam, weight)
            lr = descend(optimizers.main, objective.total, step)
            _discard_grads(model.worst_parameters())
    else:
        with Tape():
            objective = descent_objective(model, views, policy, record, config, lam, weight)
            optimizers.main.zero_grad()
            backward(objective.total)
            _discard_grads(model.worst_parameters())
            if active:
                backward(adversary_objective(model, views, record, config.adversary_loss,
                                             config.clamp_eps))
            lr = optimizers.main.step(step)
            if active:
                optimizers.worst.step(step)
        if active:
            disagreement = worst_disagreement(model, views.unlabeled_strong, record)

    adv = objective.adv
    return StepMetrics(
        step=step, loss_sup=objective.core.loss_sup.item(), lr=lr, unlabeled_size=len(record),
        loss_pseudo=objective.core.pseudo_value, loss_adv=adv.item() if adv is not None else None,
        record=record, worst_disagreement=disagreement)
