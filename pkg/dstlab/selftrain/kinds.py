from enum import Enum


class AlgorithmKind(str, Enum):
    SUPERVISED = "supervised"
    PSEUDO_LABEL = "pseudo_label"
    FIXMATCH = "fixmatch"
    FLEXMATCH_LITE = "flexmatch_lite"
    MEAN_TEACHER = "mean_teacher"
    NOISY_STUDENT = "noisy_student"
    MUTUAL_LEARNING = "mutual_learning"


DEBIASABLE_KINDS = frozenset({
    AlgorithmKind.FIXMATCH,
    AlgorithmKind.FLEXMATCH_LITE,
    AlgorithmKind.MEAN_TEACHER,
    AlgorithmKind.NOISY_STUDENT,
})
