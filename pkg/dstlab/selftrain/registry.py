from typing import Dict, Type

from dstlab.data.split import SslSplit
from dstlab.dst.debiased import wrap_debiased
from dstlab.schemas.run_config import RunConfig
from dstlab.selftrain.algorithms import (FixMatchTrainer, FlexMatchLiteTrainer,
                                         MeanTeacherTrainer, MutualLearningTrainer,
                                         PseudoLabelTrainer, SelfTrainer, SupervisedTrainer)
from dstlab.selftrain.kinds import AlgorithmKind
from dstlab.selftrain.noisy_student import NoisyStudentTrainer

TRAINERS: Dict[AlgorithmKind, Type[SelfTrainer]] = {
    AlgorithmKind.SUPERVISED: SupervisedTrainer,
    AlgorithmKind.PSEUDO_LABEL: PseudoLabelTrainer,
    AlgorithmKind.FIXMATCH: FixMatchTrainer,
    AlgorithmKind.FLEXMATCH_LITE: FlexMatchLiteTrainer,
    AlgorithmKind.MEAN_TEACHER: MeanTeacherTrainer,
    AlgorithmKind.NOISY_STUDENT: NoisyStudentTrainer,
    AlgorithmKind.MUTUAL_LEARNING: MutualLearningTrainer,
}


def build_trainer(config: RunConfig, split: SslSplit) -> SelfTrainer:
    spec = config.algorithm
    if spec.debiased:
        return wrap_debiased(spec.kind, config, split)
    return TRAINERS[spec.kind](config, split)
