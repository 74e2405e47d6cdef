"""Dense tensors, reverse-mode differentiation, optimisation and weight files."""

from qmvos.tensorlab import ops
from qmvos.tensorlab.tensor import Tensor, Tape, TapeEntry, Gradients, backward
from qmvos.tensorlab.gradcheck import GradCheckResult, check_gradients, grad_check
from qmvos.tensorlab.optim import ParamStore, adamw_step
from qmvos.tensorlab.init import seeded_rng, he_normal, xavier_normal
from qmvos.tensorlab.serialization import (
    MAGIC,
    encode_params,
    decode_params,
    save_params,
    load_params,
)

__all__ = [
    "ops",
    "Tensor",
    "Tape",
    "TapeEntry",
    "Gradients",
    "backward",
    "GradCheckResult",
    "check_gradients",
    "grad_check",
    "ParamStore",
    "adamw_step",
    "seeded_rng",
    "he_normal",
    "xavier_normal",
    "MAGIC",
    "encode_params",
    "decode_params",
    "save_params",
    "load_params",
]
