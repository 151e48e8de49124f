# Trainer classes (algorithms, noisy_student, registry) depend on the run
# config schema and are imported from their modules directly.
from dstlab.selftrain.flexmatch import LearningStatus, flexmatch_lite_thresholds
from dstlab.selftrain.kinds import DEBIASABLE_KINDS, AlgorithmKind
from dstlab.selftrain.pseudo import (PseudoBatchRecord, PseudoLabelPolicy, pseudo_label,
                                     pseudo_label_from_probs, supervised_loss, unlabeled_loss)
from dstlab.selftrain.steps import (StepMetrics, fixmatch_step, mean_teacher_step,
                                    mutual_learning_step, pseudo_label_step, self_training_step,
                                    supervised_step)

__all__ = [
    "AlgorithmKind", "DEBIASABLE_KINDS", "LearningStatus", "PseudoBatchRecord",
    "PseudoLabelPolicy", "StepMetrics", "fixmatch_step", "flexmatch_lite_thresholds",
    "mean_teacher_step", "mutual_learning_step", "pseudo_label", "pseudo_label_from_probs",
    "pseudo_label_step", "self_training_step", "supervised_loss", "supervised_step",
    "unlabeled_loss",
]
