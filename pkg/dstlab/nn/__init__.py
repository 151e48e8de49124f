from dstlab.nn.ema import DEFAULT_EMA_DECAY, EmaShadow, ema_update
from dstlab.nn.functional import (DEFAULT_CLAMP_EPS, IGNORE_INDEX, Mode, complement_cross_entropy,
                                  dropout, log_softmax, relu, softmax, softmax_cross_entropy)
from dstlab.nn.layers import DenseLayer, Dropout, ReLU, forward_dense
from dstlab.nn.module import Module
from dstlab.nn.optim import (LrSchedule, ScheduleKind, SgdOptimizer,
                             clip_grad_norm, global_grad_norm, sgd_step)
from dstlab.nn.snapshot import ParamSnapshot, restore_params, snapshot_params
from dstlab.nn.tensor import (Parameter, Tape, Tensor, as_tensor, backward,
                              grad_enabled, no_grad)

__all__ = [
    "DEFAULT_CLAMP_EPS", "DEFAULT_EMA_DECAY", "IGNORE_INDEX", "DenseLayer", "Dropout",
    "EmaShadow", "LrSchedule", "Mode", "Module", "ParamSnapshot", "Parameter", "ReLU",
    "ScheduleKind", "SgdOptimizer", "Tape", "Tensor", "as_tensor", "backward",
    "clip_grad_norm", "complement_cross_entropy", "dropout", "ema_update", "forward_dense", "global_grad_norm",
    "grad_enabled", "log_softmax", "no_grad", "relu", "restore_params", "sgd_step",
    "snapshot_params", "softmax", "softmax_cross_entropy",
]
