"""Run summaries and multi-seed aggregates as written to disk."""
import math
from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, field_serializer

INFINITY_LABEL = "inf"


def _json_float(value: Optional[float]):
    if value is None:
        return None
    if math.isinf(value):
        return INFINITY_LABEL if value > 0 else f"-{INFINITY_LABEL}"
    if math.isnan(value):
        return None
    return value


class RoundSummary(BaseModel):
    round: int
    start_step: int
    end_step: int
    accuracy: float
    per_class_accuracy: List[float] = []


class ImbalanceSummary(BaseModel):
    final: float
    min: float
    max: float
    evals_infinite: int = Field(0, description="Eval intervals at which some class was never predicted")

    @field_serializer("final", "min", "max")
    def serialize_ratio(self, value: float):
        return _json_float(value)


class RunReport(BaseModel):
    name: str
    algorithm: str
    seed: int
    status: str = "completed"
    steps_completed: int = 0
    failed_step: Optional[int] = None
    error: Optional[str] = None
    final_accuracy: Optional[float] = None
    best_accuracy: Optional[float] = None
    best_step: Optional[int] = None
    worst1: Optional[float] = None
    worst10: Optional[float] = None
    worst20: Optional[float] = None
    imbalance_ratio: Optional[ImbalanceSummary] = None
    pl_quantity: Optional[float] = None
    pl_quality: Optional[float] = None
    rounds: List[RoundSummary] = []
    wall_time: float = 0.0
    paths: Dict[str, object] = {}

    def metric_values(self) -> Dict[str, Optional[float]]:
        """Scalar metrics that sweeps aggregate."""
        return {
            "final_accuracy": self.final_accuracy,
            "best_accuracy": self.best_accuracy,
            "worst1": self.worst1,
            "worst10": self.worst10,
            "worst20": self.worst20,
            "final_imbalance_ratio": self.imbalance_ratio.final if self.imbalance_ratio else None,
            "pl_quantity": self.pl_quantity,
            "pl_quality": self.pl_quality,
        }


class MetricAggregate(BaseModel):
    mean: Optional[float]
    std: Optional[float]
    count: int
    values: List[Optional[float]]

    @field_serializer("mean", "std")
    def serialize_stat(self, value: Optional[float]):
        return _json_float(value)

    @field_serializer("values")
    def serialize_values(self, values: List[Optional[float]]):
        return [_json_float(v) for v in values]


def aggregate_metric(values: Sequence[Optional[float]]) -> MetricAggregate:
    """Mean and population std (ddof=0) over the defined values."""
    defined = np.array([v for v in values if v is not None], dtype=np.float64)
    if defined.size == 0:
        return MetricAggregate(mean=None, std=None, count=0, values=list(values))
    with np.errstate(invalid="ignore"):
        mean = float(defined.mean())
        std = float(defined.std(ddof=0))
    return MetricAggregate(mean=mean, std=std, count=int(defined.size), values=list(values))


def aggregate(reports: Sequence[RunReport]) -> Dict[str, MetricAggregate]:
    names = list(reports[0].metric_values()) if reports else []
    return {name: aggregate_metric([r.metric_values()[name] for r in reports]) for name in names}
