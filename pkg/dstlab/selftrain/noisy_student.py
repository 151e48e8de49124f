"""Round-based self-training with a frozen previous-round teacher."""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import structlog

from dstlab.data.batching import BatchPlan, JointBatcher, StepViews, ViewMaker
from dstlab.data.split import SslSplit
from dstlab.models.base import ModelBundle, freeze
from dstlab.nn.snapshot import restore_params, snapshot_params
from dstlab.schemas.run_config import RunConfig
from dstlab.selftrain.algorithms import SelfTrainer
from dstlab.selftrain.kinds import AlgorithmKind
from dstlab.selftrain.pseudo import pseudo_label
from dstlab.selftrain.rounds import RoundSpan, round_schedule
from dstlab.selftrain.steps import StepMetrics, self_training_step, supervised_step

logger = structlog.get_logger()


def round_tag(index: int) -> str:
    return "" if index == 0 else f".round{index}"


class RoundTraining:
    """Round bookkeeping shared by plain and debiased Noisy Student.

    Subclasses implement ``start_round`` (re-initialise the student and its
    optimizer, freeze the teacher) and ``round_step``.
    """

    rounds: List[RoundSpan]
    current: RoundSpan

    def span_for(self, step: int) -> RoundSpan:
        for span in self.rounds:
            if step in span:
                return span
        return self.rounds[-1]

    def round_spans(self) -> Tuple[RoundSpan, ...]:
        return tuple(self.rounds)

    def freeze_teacher(self, student: ModelBundle, fresh: ModelBundle) -> ModelBundle:
        """Copy ``student`` byte-exactly into ``fresh`` and freeze it."""
        restore_params(fresh, snapshot_params(student))
        fresh.eval()
        return freeze(fresh)

    def train_step(self, views: StepViews, step: int) -> StepMetrics:
        span = self.span_for(step)
        if span.index != self.current.index:
            logger.info("Starting self-training round", round=span.index, start=span.start,
                        steps=span.length)
            self.current = span
            self.start_round(span)
        metrics = self.round_step(views, step - span.start, span)
        metrics.step = step
        return metrics


class NoisyStudentTrainer(RoundTraining, SelfTrainer):
    """Round 0 is supervised; later rounds train a re-initialised, noised
    student against the frozen previous-round model."""
    kind = AlgorithmKind.NOISY_STUDENT

    def __init__(self, config: RunConfig, split: SslSplit, model: Optional[ModelBundle] = None):
        super().__init__(config, split, model)
        self.rounds = round_schedule(config.total_steps, config.algorithm.rounds)
        self.current = self.rounds[0]
        self.teacher: Optional[ModelBundle] = None
        self.optimizer = self.build_optimizer(self.model.parameters(), self.current.length)

    def start_round(self, span: RoundSpan) -> None:
        self.teacher = self.freeze_teacher(self.model, self.build_model(round_tag(span.index - 1)))
        self.model = self.build_model(round_tag(span.index), self.config.algorithm.student_dropout)
        self.optimizer = self.build_optimizer(self.model.parameters(), span.length)

    def round_step(self, views: StepViews, local_step: int, span: RoundSpan) -> StepMetrics:
        if span.index == 0:
            return supervised_step(self.model, views, self.optimizer, local_step, self.clamp_eps)
        record = pseudo_label(self.teacher, views.unlabeled_weak, self.policy)
        return self_training_step(self.model, views, record, self.lam_at(local_step),
                                  self.optimizer, local_step, clamp_eps=self.clamp_eps)


@dataclass
class RoundReport:
    round: int
    start_step: int
    end_step: int
    accuracy: float
    per_class_accuracy: List[float] = field(default_factory=list)


def noisy_student_run(config: RunConfig, split: SslSplit, rounds: int,
                      per_round_steps: int) -> List[RoundReport]:
    """Train Noisy Student (or its debiased variant when the config says so)
    for ``rounds`` rounds of ``per_round_steps`` steps and evaluate each round."""
    from dstlab.metrics.evaluation import evaluate_model
    from dstlab.selftrain.registry import build_trainer

    config = config.with_overrides(**{
        "algorithm.kind": AlgorithmKind.NOISY_STUDENT.value,
        "algorithm.rounds": rounds,
        "total_steps": rounds * per_round_steps,
    })
    trainer = build_trainer(config, split)
    batcher = JointBatcher(split, BatchPlan(config.batch.labeled_batch,
                                            config.batch.unlabeled_ratio, config.seed))
    make_views = ViewMaker(config.augmentation, config.seed, split.grid_shape)
    ends = {end: index for index, end in enumerate(trainer.round_end_steps())}
    reports = []
    for step in range(config.total_steps):
        trainer.train_step(make_views(batcher.next_joint_batch()), step)
        if step in ends:
            stats = evaluate_model(trainer.inference_model(), split.eval)
            span = trainer.round_spans()[ends[step]]
            reports.append(RoundReport(span.index, span.start, span.end, stats.accuracy,
                                       stats.per_class_accuracy.tolist()))
            logger.info("Round finished", round=span.index, accuracy=stats.accuracy)
    return reports
