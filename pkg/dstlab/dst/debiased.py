"""Debiased variants of the base self-training algorithms.

Whatever the base, pseudo labels come from a main head ``h`` (the live
one, its EMA, or the previous round's), are consumed only by ``h_pseudo``,
and ``h`` itself trains on clean labels alone.
"""
from typing import Dict, Optional

import structlog

from dstlab.data.batching import StepViews
from dstlab.data.split import SslSplit
from dstlab.dst.model import PSEUDO_HEAD, WORST_HEAD, DstModel
from dstlab.dst.trainer import DstOptimizers, dst_train_step
from dstlab.exceptions import ConfigError
from dstlab.models.base import MAIN_HEAD, ModelBundle
from dstlab.models.heads import HeadKind
from dstlab.nn.ema import EmaShadow, ema_update
from dstlab.nn.optim import LrSchedule, ScheduleKind
from dstlab.schemas.run_config import RunConfig
from dstlab.selftrain.algorithms import SelfTrainer
from dstlab.selftrain.flexmatch import LearningStatus
from dstlab.selftrain.kinds import AlgorithmKind
from dstlab.selftrain.noisy_student import RoundTraining, round_tag
from dstlab.selftrain.pseudo import pseudo_label
from dstlab.selftrain.rounds import RoundSpan, round_schedule
from dstlab.selftrain.steps import StepMetrics, supervised_step

logger = structlog.get_logger()


class DebiasedTrainer(SelfTrainer):
    """Debiased FixMatch; the other variants change only the label source."""
    kind = AlgorithmKind.FIXMATCH

    def __init__(self, config: RunConfig, split: SslSplit, model: Optional[DstModel] = None):
        super().__init__(config, split, model)
        self.dst_config = config.dst_config()
        self.optimizers = self.build_optimizers(self.model)

    @property
    def label(self) -> str:
        return f"dst_{self.kind.value}"

    def head_kinds(self) -> Dict[str, HeadKind]:
        spec = self.config.model
        heads = {MAIN_HEAD: spec.main_head, PSEUDO_HEAD: spec.pseudo_head}
        if self.config.dst.worst_case:
            heads[WORST_HEAD] = spec.worst_head
        return heads

    def build_model(self, tag: str = "", feature_dropout: Optional[float] = None) -> DstModel:
        bundle = super().build_model(tag, feature_dropout)
        return DstModel(bundle.psi, bundle.heads)

    def build_optimizers(self, model: DstModel, total_steps: Optional[int] = None) -> DstOptimizers:
        spec = self.config.optimizer
        if spec.schedule == ScheduleKind.COSINE:
            schedule = LrSchedule.cosine(total_steps or self.config.total_steps)
        else:
            schedule = LrSchedule.constant()
        return DstOptimizers.build(model, spec.lr, spec.momentum, spec.weight_decay,
                                   schedule, spec.grad_clip)

    def pseudo_source(self) -> ModelBundle:
        return self.model

    def train_step(self, views: StepViews, step: int) -> StepMetrics:
        return dst_train_step(self.model, views, self.dst_config, self.optimizers, step,
                              policy=self.policy, pseudo_source=self.pseudo_source(),
                              lam=self.lam_at(step))


class DebiasedFlexMatchLite(DebiasedTrainer):
    """Learning status is estimated from the main head's pseudo labels."""
    kind = AlgorithmKind.FLEXMATCH_LITE

    def __init__(self, config: RunConfig, split: SslSplit, model: Optional[DstModel] = None):
        super().__init__(config, split, model)
        self.status = LearningStatus(split.num_classes, config.algorithm.flexmatch_window)

    def train_step(self, views: StepViews, step: int) -> StepMetrics:
        metrics = dst_train_step(self.model, views, self.dst_config, self.optimizers, step,
                                 policy=self.status.policy(self.policy), lam=self.lam_at(step))
        self.status.update(metrics.record)
        return metrics


class DebiasedMeanTeacher(DebiasedTrainer):
    """Pseudo labels from an EMA of psi and h."""
    kind = AlgorithmKind.MEAN_TEACHER

    def __init__(self, config: RunConfig, split: SslSplit, model: Optional[DstModel] = None):
        super().__init__(config, split, model)
        self.teacher = EmaShadow(self.model.inference_bundle(), config.algorithm.ema_decay)

    def pseudo_source(self) -> ModelBundle:
        return self.teacher.module

    def train_step(self, views: StepViews, step: int) -> StepMetrics:
        metrics = super().train_step(views, step)
        ema_update(self.teacher, self.model.inference_bundle().parameters())
        return metrics


class DebiasedNoisyStudent(RoundTraining, DebiasedTrainer):
    """Pseudo labels from the previous round's frozen psi and h."""
    kind = AlgorithmKind.NOISY_STUDENT

    def __init__(self, config: RunConfig, split: SslSplit, model: Optional[DstModel] = None):
        self.rounds = round_schedule(config.total_steps, config.algorithm.rounds)
        self.current = self.rounds[0]
        self.teacher: Optional[ModelBundle] = None
        super().__init__(config, split, model)
        self.optimizers = self.build_optimizers(self.model, self.current.length)

    def start_round(self, span: RoundSpan) -> None:
        previous = self.build_model(round_tag(span.index - 1)).inference_bundle()
        self.teacher = self.freeze_teacher(self.model.inference_bundle(), previous)
        self.model = self.build_model(round_tag(span.index), self.config.algorithm.student_dropout)
        self.optimizers = self.build_optimizers(self.model, span.length)

    def round_step(self, views: StepViews, local_step: int, span: RoundSpan) -> StepMetrics:
        if span.index == 0:
            return supervised_step(self.model, views, self.optimizers.main, local_step, self.clamp_eps)
        record = pseudo_label(self.teacher, views.unlabeled_weak, self.policy)
        return dst_train_step(self.model, views, self.dst_config, self.optimizers, local_step,
                              policy=self.policy, record=record, lam=self.lam_at(local_step))


DEBIASED_TRAINERS = {
    AlgorithmKind.FIXMATCH: DebiasedTrainer,
    AlgorithmKind.FLEXMATCH_LITE: DebiasedFlexMatchLite,
    AlgorithmKind.MEAN_TEACHER: DebiasedMeanTeacher,
    AlgorithmKind.NOISY_STUDENT: DebiasedNoisyStudent,
}


def wrap_debiased(base: AlgorithmKind, config: RunConfig, split: SslSplit,
                  model: Optional[DstModel] = None) -> DebiasedTrainer:
    """Debiased trainer for ``base`` around ``model`` (built from the config when None)."""
    try:
        trainer_cls = DEBIASED_TRAINERS[AlgorithmKind(base)]
    except (KeyError, ValueError) as e:
        raise ConfigError(f"no debiased variant of '{getattr(base, 'value', base)}'",
                          errors=[f"supported: {sorted(k.value for k in DEBIASED_TRAINERS)}"]) from e
    return trainer_cls(config, split, model)
