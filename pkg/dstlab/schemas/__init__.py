from dstlab.schemas.report import (MetricAggregate, RoundSummary, RunReport, aggregate,
                                   aggregate_metric)
from dstlab.schemas.run_config import (AlgorithmSpec, BatchSpec, BlobsSpec, CsvSpec, IdxSpec,
                                       MetricsSpec, ModelSpec, OptimizerSpec, RingsSpec,
                                       RunConfig, SplitSpec, TwoMoonsSpec, load_run_config,
                                       parse_run_config)

__all__ = [
    "AlgorithmSpec", "BatchSpec", "BlobsSpec", "CsvSpec", "IdxSpec", "MetricAggregate",
    "MetricsSpec", "ModelSpec", "OptimizerSpec", "RingsSpec", "RoundSummary", "RunConfig",
    "RunReport", "SplitSpec", "TwoMoonsSpec", "aggregate", "aggregate_metric",
    "load_run_config", "parse_run_config",
]
