from dstlab.metrics.bias import (BiasReport, ClassStats, bias_decomposition, imbalance_ratio,
                                 per_class_error, ratio_from_counts, worst_k_accuracy)
from dstlab.metrics.evaluation import (annotate_record, evaluate_model, evaluate_on_unlabeled,
                                       evaluate_pseudolabeler)
from dstlab.metrics.pseudo_stats import (NOT_AVAILABLE, PseudoLabelStats, PseudoStatsWindow,
                                         pseudo_stats)

__all__ = [
    "BiasReport", "ClassStats", "NOT_AVAILABLE", "PseudoLabelStats", "PseudoStatsWindow",
    "annotate_record", "bias_decomposition", "evaluate_model", "evaluate_on_unlabeled",
    "evaluate_pseudolabeler", "imbalance_ratio", "per_class_error", "pseudo_stats",
    "ratio_from_counts", "worst_k_accuracy",
]
