from dstlab.models.backbone import FeatureGenerator
from dstlab.models.base import MAIN_HEAD, ModelBundle, freeze, parameters_changed
from dstlab.models.builder import (Architecture, build_feature_generator, build_head,
                                   build_model)
from dstlab.models.heads import Head, HeadKind

__all__ = [
    "Architecture",
    "FeatureGenerator",
    "Head",
    "HeadKind",
    "MAIN_HEAD",
    "ModelBundle",
    "build_feature_generator",
    "build_head",
    "build_model",
    "freeze",
    "parameters_changed",
]
