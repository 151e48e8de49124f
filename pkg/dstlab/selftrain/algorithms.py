"""Trainer objects that own a model, its optimizer and any teacher state.

The harness drives every algorithm the same way: one ``train_step`` per
batch of views, and ``inference_model`` for evaluation.
"""
from abc import ABC, abstractmethod
from typing import Dict, Optional, Tuple

import structlog

from dstlab.data.batching import StepViews
from dstlab.data.split import SslSplit
from dstlab.models.base import MAIN_HEAD, ModelBundle
from dstlab.models.builder import Architecture, build_model
from dstlab.models.heads import HeadKind
from dstlab.nn.ema import EmaShadow
from dstlab.nn.optim import LrSchedule, ScheduleKind, SgdOptimizer
from dstlab.schemas.run_config import RunConfig
from dstlab.selftrain.flexmatch import LearningStatus
from dstlab.selftrain.kinds import AlgorithmKind
from dstlab.selftrain.pseudo import PseudoLabelPolicy
from dstlab.selftrain.rounds import RoundSpan
from dstlab.selftrain.steps import (StepMetrics, fixmatch_step, mean_teacher_step,
                                    mutual_learning_step, pseudo_label_step, ramped_lambda,
                                    supervised_step)

logger = structlog.get_logger()

PEER_HEAD = "h_b"


def architecture_for(config: RunConfig, split: SslSplit) -> Architecture:
    spec = config.model
    return Architecture(
        input_dim=split.input_dim,
        num_classes=split.num_classes,
        embedding_dim=spec.embedding_dim,
        depth=spec.depth,
        hidden_dim=spec.hidden_dim,
        projection_dim=spec.projection_dim,
        head_dropout=spec.head_dropout,
        feature_dropout=spec.feature_dropout,
    )


class SelfTrainer(ABC):
    """Base class for every algorithm the harness can run."""

    kind: AlgorithmKind

    def __init__(self, config: RunConfig, split: SslSplit, model: Optional[ModelBundle] = None):
        self.config = config
        self.split = split
        self.seed = config.seed
        self.arch = architecture_for(config, split)
        self.policy = PseudoLabelPolicy(config.algorithm.tau)
        self.lam = config.algorithm.lam
        self.clamp_eps = config.dst.clamp_eps
        self.model = model if model is not None else self.build_model()

    @property
    def label(self) -> str:
        return self.kind.value

    def head_kinds(self) -> Dict[str, HeadKind]:
        return {MAIN_HEAD: self.config.model.main_head}

    def build_model(self, tag: str = "", feature_dropout: Optional[float] = None) -> ModelBundle:
        return build_model(self.arch, self.head_kinds(), self.seed, tag, feature_dropout)

    def build_optimizer(self, params, total_steps: Optional[int] = None) -> SgdOptimizer:
        spec = self.config.optimizer
        if spec.schedule == ScheduleKind.COSINE:
            schedule = LrSchedule.cosine(total_steps or self.config.total_steps)
        else:
            schedule = LrSchedule.constant()
        return SgdOptimizer(params, spec.lr, spec.momentum, spec.weight_decay, schedule, spec.grad_clip)

    def lam_at(self, step: int) -> float:
        return ramped_lambda(self.lam, step, self.config.algorithm.unlabeled_warmup_steps)

    def inference_model(self) -> ModelBundle:
        return self.model.inference_bundle()

    def round_spans(self) -> Tuple[RoundSpan, ...]:
        """Training rounds in step order; empty for single-phase algorithms."""
        return ()

    def round_end_steps(self) -> Tuple[int, ...]:
        """Global step indices after which a training round finishes."""
        return tuple(span.end - 1 for span in self.round_spans())

    @abstractmethod
    def train_step(self, views: StepViews, step: int) -> StepMetrics:
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__}(seed={self.seed}, model={self.model!r})>"


class _SingleOptimizerTrainer(SelfTrainer):
    def __init__(self, config: RunConfig, split: SslSplit, model: Optional[ModelBundle] = None):
        super().__init__(config, split, model)
        self.optimizer = self.build_optimizer(self.model.parameters())


class SupervisedTrainer(_SingleOptimizerTrainer):
    kind = AlgorithmKind.SUPERVISED

    def train_step(self, views: StepViews, step: int) -> StepMetrics:
        return supervised_step(self.model, views, self.optimizer, step, self.clamp_eps)


class PseudoLabelTrainer(_SingleOptimizerTrainer):
    kind = AlgorithmKind.PSEUDO_LABEL

    def train_step(self, views: StepViews, step: int) -> StepMetrics:
        return pseudo_label_step(self.model, views, self.policy, self.lam_at(step),
                                 self.optimizer, step, self.clamp_eps)


class FixMatchTrainer(_SingleOptimizerTrainer):
    kind = AlgorithmKind.FIXMATCH

    def train_step(self, views: StepViews, step: int) -> StepMetrics:
        return fixmatch_step(self.model, views, self.policy, self.lam_at(step),
                             self.optimizer, step, self.clamp_eps)


class FlexMatchLiteTrainer(_SingleOptimizerTrainer):
    kind = AlgorithmKind.FLEXMATCH_LITE

    def __init__(self, config: RunConfig, split: SslSplit, model: Optional[ModelBundle] = None):
        super().__init__(config, split, model)
        self.status = LearningStatus(split.num_classes, config.algorithm.flexmatch_window)

    def train_step(self, views: StepViews, step: int) -> StepMetrics:
        metrics = fixmatch_step(self.model, views, self.status.policy(self.policy),
                                self.lam_at(step), self.optimizer, step, self.clamp_eps)
        self.status.update(metrics.record)
        return metrics


class MeanTeacherTrainer(_SingleOptimizerTrainer):
    kind = AlgorithmKind.MEAN_TEACHER

    def __init__(self, config: RunConfig, split: SslSplit, model: Optional[ModelBundle] = None):
        super().__init__(config, split, model)
        self.teacher = EmaShadow(self.model, config.algorithm.ema_decay)

    def train_step(self, views: StepViews, step: int) -> StepMetrics:
        return mean_teacher_step(self.model, self.teacher, views, self.policy, self.lam_at(step),
                                 self.optimizer, step, self.clamp_eps)


class MutualLearningTrainer(_SingleOptimizerTrainer):
    """Two main-kind heads on one psi teaching each other."""
    kind = AlgorithmKind.MUTUAL_LEARNING

    def head_kinds(self) -> Dict[str, HeadKind]:
        kind = self.config.model.main_head
        return {MAIN_HEAD: kind, PEER_HEAD: kind}

    def train_step(self, views: StepViews, step: int) -> StepMetrics:
        return mutual_learning_step(self.model, views, self.policy, self.lam_at(step),
                                    self.optimizer, step, (MAIN_HEAD, PEER_HEAD), self.clamp_eps)
