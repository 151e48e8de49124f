"""Single-run execution: dataset, split, training loop, metrics and artifacts."""
import math
import time
from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Optional, Union

import pandas as pd
import structlog

from dstlab.config import settings
from dstlab.data.batching import BatchPlan, JointBatcher, ViewMaker
from dstlab.data.dataset import Dataset
from dstlab.data.generators import gen_gaussian_blobs, gen_rings, gen_two_moons
from dstlab.data.io import load_csv, load_idx
from dstlab.data.split import SslSplit, make_ssl_split
from dstlab.exceptions import ConfigError, NonFiniteLossError
from dstlab.metrics.bias import ClassStats, bias_decomposition, worst_k_accuracy
from dstlab.metrics.evaluation import annotate_record, evaluate_model, evaluate_pseudolabeler
from dstlab.metrics.pseudo_stats import PseudoStatsWindow
from dstlab.models.base import ModelBundle
from dstlab.schemas.report import ImbalanceSummary, RoundSummary, RunReport
from dstlab.schemas.run_config import RunConfig, load_run_config
from dstlab.selftrain.algorithms import SelfTrainer
from dstlab.selftrain.kinds import AlgorithmKind
from dstlab.selftrain.registry import build_trainer
from dstlab.selftrain.steps import StepMetrics
from dstlab.services.charts import run_charts
from dstlab.services.storage import (BIAS_REPORT_FILE, CONFIG_FILE, METRICS_FILE, SUMMARY_FILE,
                                     RunStorage)

logger = structlog.get_logger()

METRICS_COLUMNS = [
    "step", "acc", "worst10", "worst20", "imbalance_ratio", "pl_quantity", "pl_quality",
    "loss_sup", "loss_pseudo", "loss_adv", "lr", "worst_disagreement",
]
INTERVAL_MEANS = ("loss_sup", "loss_pseudo", "loss_adv", "worst_disagreement")


def build_dataset(config: RunConfig) -> Dataset:
    spec = config.dataset
    if spec.kind == "two_moons":
        return gen_two_moons(spec.n, spec.noise_sigma, spec.seed)
    if spec.kind == "blobs":
        return gen_gaussian_blobs(spec.num_classes, spec.n_per_class, spec.spread,
                                  spec.class_distance_profile, spec.seed)
    if spec.kind == "rings":
        return gen_rings(spec.num_classes, spec.n_per_class, spec.noise, spec.seed)
    if spec.kind == "csv":
        return load_csv(spec.path, spec.label_column)
    if spec.kind == "idx":
        return load_idx(spec.images_path, spec.labels_path)
    raise ConfigError(f"unknown dataset kind '{spec.kind}'")


def build_split(config: RunConfig, dataset: Dataset) -> SslSplit:
    spec = config.split
    return make_ssl_split(dataset, spec.k_per_class, spec.eval_fraction,
                          spec.include_labeled_in_unlabeled, config.seed, spec.standardize)


def clamp_k(k: int, num_classes: int) -> int:
    return max(1, min(k, num_classes))


class IntervalMeans:
    """Means of per-step values since the last eval row; None when no step had one."""

    def __init__(self):
        self.values: Dict[str, List[float]] = defaultdict(list)

    def add(self, metrics: StepMetrics) -> None:
        for name, value in (*metrics.losses().items(), ("worst_disagreement", metrics.worst_disagreement)):
            if value is not None:
                self.values[name].append(value)

    def pop(self) -> Dict[str, Optional[float]]:
        means = {name: (sum(self.values[name]) / len(self.values[name]) if self.values[name] else None)
                 for name in INTERVAL_MEANS}
        self.values.clear()
        return means


def check_finite(metrics: StepMetrics) -> None:
    for component, value in metrics.losses().items():
        if value is not None and not math.isfinite(value):
            raise NonFiniteLossError(metrics.step, component, value)


class TrainingSession:
    """Drives one trainer over the configured number of steps and records
    one metrics row per eval interval."""

    def __init__(self, config: RunConfig, split: SslSplit, trainer: SelfTrainer):
        self.config = config
        self.split = split
        self.trainer = trainer
        self.batcher = JointBatcher(split, BatchPlan(config.batch.labeled_batch,
                                                     config.batch.unlabeled_ratio, config.seed))
        self.make_views = ViewMaker(config.augmentation, config.seed, split.grid_shape)
        self.window = PseudoStatsWindow(config.metrics.window)
        self.interval = IntervalMeans()
        self.rows: List[dict] = []
        self.rounds: List[RoundSummary] = []
        self.last_stats: Optional[ClassStats] = None
        self.steps_completed = 0

    def run(self, total_steps: Optional[int] = None) -> List[dict]:
        total_steps = self.config.total_steps if total_steps is None else total_steps
        round_ends = {end: i for i, end in enumerate(self.trainer.round_end_steps())}
        lr = None
        for step in range(total_steps):
            views = self.make_views(self.batcher.next_joint_batch())
            metrics = self.trainer.train_step(views, step)
            check_finite(metrics)
            lr = metrics.lr
            if metrics.record is not None:
                self.window.add(annotate_record(metrics.record, self.split, views.unlabeled_index))
            self.interval.add(metrics)
            self.steps_completed = step + 1
            logger.debug("Training step", step=step, loss_sup=metrics.loss_sup,
                         retained=metrics.retained_count)
            if step in round_ends:
                self._record_round(round_ends[step], step)
            if (step + 1) % self.config.eval_every == 0 or step + 1 == total_steps:
                self.rows.append(self._eval_row(step + 1, lr))
        return self.rows

    def _record_round(self, index: int, step: int) -> None:
        stats = evaluate_model(self.trainer.inference_model(), self.split.eval)
        span = self.trainer.round_spans()[index]
        self.rounds.append(RoundSummary(round=index, start_step=span.start, end_step=step + 1,
                                        accuracy=stats.accuracy,
                                        per_class_accuracy=stats.per_class_accuracy.tolist()))
        logger.info("Round finished", round=index, step=step + 1, accuracy=stats.accuracy)

    def _eval_row(self, step: int, lr: Optional[float]) -> dict:
        stats = evaluate_model(self.trainer.inference_model(), self.split.eval)
        self.last_stats = stats
        num_classes = stats.num_classes
        pl = self.window.stats()
        row = {
            "step": step,
            "acc": stats.accuracy,
            "worst10": worst_k_accuracy(stats, clamp_k(10, num_classes)),
            "worst20": worst_k_accuracy(stats, clamp_k(20, num_classes)),
            "imbalance_ratio": stats.imbalance_ratio,
            "pl_quantity": pl.quantity if pl else None,
            "pl_quality": pl.quality if pl else None,
            "lr": lr,
        }
        row.update(self.interval.pop())
        logger.info("Eval interval", step=step, acc=round(stats.accuracy, 4),
                    pl_quantity=row["pl_quantity"], pl_quality=row["pl_quality"])
        return row

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=METRICS_COLUMNS)


def reference_pseudolabeler(config: RunConfig, split: SslSplit) -> ModelBundle:
    """Supervised-only model trained from the same initial psi/h, seed and
    labeled views: the pseudolabeler self-training starts from."""
    reference_config = config.with_overrides(**{
        "algorithm.kind": AlgorithmKind.SUPERVISED.value,
        "algorithm.debiased": False,
    })
    trainer = build_trainer(reference_config, split)
    session = TrainingSession(reference_config, split, trainer)
    for step in range(config.metrics.reference_steps):
        views = session.make_views(session.batcher.next_joint_batch())
        check_finite(trainer.train_step(views, step))
    return trainer.inference_model()


def _imbalance_summary(frame: pd.DataFrame) -> ImbalanceSummary:
    values = frame["imbalance_ratio"].astype(float)
    return ImbalanceSummary(final=float(values.iloc[-1]), min=float(values.min()),
                            max=float(values.max()),
                            evals_infinite=int((values == math.inf).sum()))


def _optional(value) -> Optional[float]:
    return None if value is None or pd.isna(value) else float(value)


def build_report(config: RunConfig, trainer: SelfTrainer, session: TrainingSession,
                 wall_time: float, paths: Dict[str, object]) -> RunReport:
    frame = session.frame()
    report = RunReport(name=config.name, algorithm=trainer.label, seed=config.seed,
                       steps_completed=session.steps_completed, rounds=session.rounds,
                       wall_time=wall_time, paths=paths)
    if frame.empty:
        return report
    final = session.last_stats
    best = frame["acc"].idxmax()
    report.final_accuracy = final.accuracy
    report.best_accuracy = float(frame["acc"].max())
    report.best_step = int(frame.loc[best, "step"])
    report.worst1 = worst_k_accuracy(final, 1)
    report.worst10 = worst_k_accuracy(final, clamp_k(10, final.num_classes))
    report.worst20 = worst_k_accuracy(final, clamp_k(20, final.num_classes))
    report.imbalance_ratio = _imbalance_summary(frame)
    report.pl_quantity = _optional(frame["pl_quantity"].iloc[-1])
    report.pl_quality = _optional(frame["pl_quality"].iloc[-1])
    return report


def execute_run(config: RunConfig, out_dir: Union[str, Path]) -> RunReport:
    """Run one experiment and write its artifacts to ``out_dir``.

    A non-finite loss aborts the run: the rows recorded so far and a summary
    naming the failing step are still written before the error propagates.
    """
    started = time.perf_counter()
    charts_enabled = config.metrics.charts and settings.charts_enabled
    storage = RunStorage(out_dir)
    storage.prepare(charts=charts_enabled)
    storage.write_json(CONFIG_FILE, config.resolved())
    log = logger.bind(run=config.name, algorithm=config.algorithm.label, seed=config.seed)
    log.info("Starting run", run_dir=str(storage.run_dir), total_steps=config.total_steps)

    dataset = build_dataset(config)
    split = build_split(config, dataset)
    reference = evaluate_pseudolabeler(reference_pseudolabeler(config, split), split,
                                       config.metrics.estimate_on)
    trainer = build_trainer(config, split)
    session = TrainingSession(config, split, trainer)
    paths: Dict[str, object] = {"metrics_csv": METRICS_FILE, "summary": SUMMARY_FILE}

    try:
        session.run()
    except NonFiniteLossError as e:
        log.error("Non-finite loss, aborting run", step=e.step, component=e.component, error=str(e))
        storage.write_csv(METRICS_FILE, session.frame())
        report = build_report(config, trainer, session, time.perf_counter() - started, paths)
        report.status = "aborted"
        report.failed_step = e.step
        report.error = str(e)
        storage.write_json(SUMMARY_FILE, report.model_dump(mode="json"))
        raise

    frame = session.frame()
    storage.write_csv(METRICS_FILE, frame)

    final = evaluate_pseudolabeler(trainer.inference_model(), split, config.metrics.estimate_on)
    bias = bias_decomposition(reference, final)
    storage.write_json(BIAS_REPORT_FILE, {
        "estimate_on": config.metrics.estimate_on,
        "reference_steps": config.metrics.reference_steps,
        **bias.to_dict(),
        "reference": reference.to_dict(),
        "final": final.to_dict(),
    })
    paths["bias_report"] = BIAS_REPORT_FILE

    if charts_enabled:
        charts = run_charts(frame, storage.charts_dir, label=config.algorithm.label)
        paths["charts"] = [str(p.relative_to(storage.run_dir)) for p in charts]

    report = build_report(config, trainer, session, time.perf_counter() - started, paths)
    storage.write_json(SUMMARY_FILE, report.model_dump(mode="json"))
    log.info("Run finished", final_accuracy=report.final_accuracy,
             best_accuracy=report.best_accuracy, wall_time=round(report.wall_time, 2))
    return report


def run(config_path: Union[str, Path], out_dir: Optional[Union[str, Path]] = None,
        seed: Optional[int] = None) -> RunReport:
    config = load_run_config(config_path)
    if seed is not None:
        config = config.with_overrides(seed=seed)
    out_dir = Path(out_dir) if out_dir is not None else Path(settings.output_root) / config.name
    return execute_run(config, out_dir)
