from dstlab.data.augment import (AugmentationSpec, Strength, StrongAugmentation,
                                 WeakAugmentation, augment, augment_batch)
from dstlab.data.batching import (BatchPlan, IndexCycler, JointBatch, JointBatcher,
                                  StepViews, ViewMaker, next_joint_batch)
from dstlab.data.dataset import Dataset, Example
from dstlab.data.generators import gen_gaussian_blobs, gen_rings, gen_two_moons
from dstlab.data.io import export_csv, load_csv, load_idx, write_idx
from dstlab.data.split import (LabeledSet, SslSplit, Standardizer, UnlabeledPool,
                               make_ssl_split)

__all__ = [
    "AugmentationSpec", "BatchPlan", "Dataset", "Example", "IndexCycler", "JointBatch",
    "JointBatcher", "LabeledSet", "SslSplit", "Standardizer", "StepViews", "Strength",
    "StrongAugmentation", "UnlabeledPool", "ViewMaker", "WeakAugmentation", "augment",
    "augment_batch", "export_csv", "gen_gaussian_blobs", "gen_rings", "gen_two_moons",
    "load_csv", "load_idx", "make_ssl_split", "next_joint_batch", "write_idx",
]
