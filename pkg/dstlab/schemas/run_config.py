"""Declarative experiment description.

Every section rejects unknown keys. ``config.resolved.json`` is the dump of
a validated ``RunConfig``, so every default the code fills in is visible.
"""
import json
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Union

from pydantic import (BaseModel, ConfigDict, Field, ValidationError, field_validator,
                      model_validator)

from dstlab.data.augment import AugmentationSpec
from dstlab.dst.config import DstConfig, DstOptions
from dstlab.exceptions import ConfigError
from dstlab.models.heads import HeadKind
from dstlab.nn.ema import DEFAULT_EMA_DECAY
from dstlab.nn.optim import ScheduleKind
from dstlab.selftrain.kinds import DEBIASABLE_KINDS, AlgorithmKind


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class TwoMoonsSpec(_Section):
    kind: Literal["two_moons"] = "two_moons"
    n: int = Field(2000, ge=4, description="Total points, split evenly between moons")
    noise_sigma: float = Field(0.15, ge=0.0)
    seed: int = Field(0, description="Generator seed; the run seed drives the split")

    @field_validator("n")
    @classmethod
    def validate_even(cls, v):
        if v % 2:
            raise ValueError("n must be even")
        return v


class BlobsSpec(_Section):
    kind: Literal["blobs"] = "blobs"
    num_classes: int = Field(5, ge=2)
    n_per_class: int = Field(300, ge=1)
    spread: float = Field(0.5, gt=0.0)
    class_distance_profile: Optional[List[float]] = Field(
        None, description="Distance of each class mean from the origin; defaults to all 1.0")
    seed: int = 0

    @model_validator(mode="after")
    def validate_profile(self):
        if self.class_distance_profile is not None and len(self.class_distance_profile) != self.num_classes:
            raise ValueError(
                f"class_distance_profile needs {self.num_classes} entries, "
                f"got {len(self.class_distance_profile)}")
        return self


class RingsSpec(_Section):
    kind: Literal["rings"] = "rings"
    num_classes: int = Field(3, ge=2)
    n_per_class: int = Field(300, ge=1)
    noise: float = Field(0.1, ge=0.0)
    seed: int = 0


class CsvSpec(_Section):
    kind: Literal["csv"] = "csv"
    path: str
    label_column: str = "label"


class IdxSpec(_Section):
    kind: Literal["idx"] = "idx"
    images_path: str
    labels_path: str


DatasetSpec = Annotated[Union[TwoMoonsSpec, BlobsSpec, RingsSpec, CsvSpec, IdxSpec],
                        Field(discriminator="kind")]


class SplitSpec(_Section):
    k_per_class: int = Field(4, ge=1, description="Labeled examples drawn per class")
    eval_fraction: float = Field(0.2, gt=0.0, lt=1.0)
    include_labeled_in_unlabeled: bool = True
    standardize: bool = True


class ModelSpec(_Section):
    embedding_dim: int = Field(64, ge=1)
    depth: int = Field(3, ge=1, description="Dense+ReLU blocks in the feature generator")
    hidden_dim: Optional[int] = Field(None, ge=1)
    main_head: HeadKind = HeadKind.LINEAR
    pseudo_head: HeadKind = HeadKind.NONLINEAR
    worst_head: HeadKind = HeadKind.NONLINEAR
    projection_dim: Optional[int] = Field(None, ge=1, description="Defaults to 2 x embedding_dim")
    head_dropout: float = Field(0.2, ge=0.0, lt=1.0)
    feature_dropout: float = Field(0.0, ge=0.0, lt=1.0)


class AlgorithmSpec(_Section):
    kind: AlgorithmKind = AlgorithmKind.FIXMATCH
    debiased: bool = Field(False, description="Wrap the base algorithm with pseudo and worst-case heads")
    lam: float = Field(1.0, ge=0.0, alias="lambda")
    tau: float = Field(0.7, gt=0.0, le=1.0)
    ema_decay: float = Field(DEFAULT_EMA_DECAY, gt=0.0, lt=1.0)
    rounds: int = Field(4, ge=1, description="Noisy Student rounds including the supervised round 0")
    student_dropout: float = Field(0.1, ge=0.0, lt=1.0)
    flexmatch_window: int = Field(50, ge=1)
    unlabeled_warmup_steps: int = Field(0, ge=0)

    @model_validator(mode="after")
    def validate_debiased(self):
        if self.debiased and self.kind not in DEBIASABLE_KINDS:
            raise ValueError(
                f"debiased variant is not available for {self.kind.value}; "
                f"supported: {sorted(k.value for k in DEBIASABLE_KINDS)}")
        return self

    @property
    def label(self) -> str:
        return f"dst_{self.kind.value}" if self.debiased else self.kind.value


class OptimizerSpec(_Section):
    lr: float = Field(0.03, gt=0.0)
    momentum: float = Field(0.9, ge=0.0, lt=1.0)
    weight_decay: float = Field(5e-4, ge=0.0)
    schedule: ScheduleKind = ScheduleKind.COSINE
    grad_clip: Optional[float] = Field(5.0, gt=0.0)


class BatchSpec(_Section):
    labeled_batch: int = Field(32, ge=1)
    unlabeled_ratio: int = Field(3, ge=1, description="mu: unlabeled batch = mu x labeled batch")


class MetricsSpec(_Section):
    window: int = Field(100, ge=1, description="Pseudo-label statistics window, in batches")
    estimate_on: Literal["eval", "unlabeled"] = "eval"
    reference_steps: Optional[int] = Field(
        None, ge=0, description="Steps of the supervised data-bias reference; defaults to eval_every")
    charts: bool = True


class RunConfig(_Section):
    name: str = "run"
    seed: int = 0
    dataset: DatasetSpec = Field(default_factory=TwoMoonsSpec)
    split: SplitSpec = SplitSpec()
    augmentation: AugmentationSpec = AugmentationSpec()
    model: ModelSpec = ModelSpec()
    algorithm: AlgorithmSpec = AlgorithmSpec()
    dst: DstOptions = DstOptions()
    optimizer: OptimizerSpec = OptimizerSpec()
    batch: BatchSpec = BatchSpec()
    total_steps: int = Field(3000, ge=1)
    eval_every: int = Field(100, ge=1)
    metrics: MetricsSpec = MetricsSpec()

    @model_validator(mode="after")
    def fill_reference_steps(self):
        if self.metrics.reference_steps is None:
            self.metrics = self.metrics.model_copy(update={"reference_steps": self.eval_every})
        return self

    def dst_config(self) -> DstConfig:
        return DstConfig.from_options(self.dst, self.algorithm.lam, self.algorithm.tau)

    def resolved(self) -> dict:
        return self.model_dump(mode="json", by_alias=True)

    def with_overrides(self, **updates) -> "RunConfig":
        """Re-validated copy with top-level or dotted ``section.field`` overrides."""
        data = self.resolved()
        for key, value in updates.items():
            target = data
            *parents, leaf = key.split(".")
            for parent in parents:
                target = target[parent]
            target[leaf] = value
        return parse_run_config(data)


def _format_errors(error: ValidationError) -> List[str]:
    messages = []
    for item in error.errors():
        loc = ".".join(str(part) for part in item["loc"])
        messages.append(f"{loc}: {item['msg']}" if loc else item["msg"])
    return messages


def parse_run_config(data: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError("invalid run config", errors=_format_errors(e)) from e


def load_run_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {path}", errors=[f"line {e.lineno}: {e.msg}"]) from e
    if not isinstance(data, dict):
        raise ConfigError(f"config root must be a JSON object: {path}")
    return parse_run_config(data)
