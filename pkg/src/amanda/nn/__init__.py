"""Differentiable-computation core: tensors, ops, Adam, grad checking."""

from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .gradcheck import GradCheckReport, grad_check
from .optim import AdamState, LrSchedule, adam_step, init_uniform, zero_grads
from .tensor import (
    ShapeError,
    Tensor,
    add,
    backward,
    bce_with_logits,
    concat,
    gather_rows,
    gru_gates,
    matmul,
    mean_,
    mse,
    mul,
    neg,
    relu,
    reshape,
    scale,
    sigmoid,
    slice_axis,
    softmax,
    softmax_cross_entropy,
    sub,
    sum_,
    tanh,
    tensor,
)

__all__ = [
    "AdamState",
    "CheckpointError",
    "GradCheckReport",
    "LrSchedule",
    "ShapeError",
    "Tensor",
    "adam_step",
    "add",
    "backward",
    "bce_with_logits",
    "concat",
    "gather_rows",
    "grad_check",
    "gru_gates",
    "init_uniform",
    "load_checkpoint",
    "matmul",
    "mean_",
    "mse",
    "mul",
    "neg",
    "relu",
    "reshape",
    "save_checkpoint",
    "scale",
    "sigmoid",
    "slice_axis",
    "softmax",
    "softmax_cross_entropy",
    "sub",
    "sum_",
    "tanh",
    "tensor",
    "zero_grads",
]
