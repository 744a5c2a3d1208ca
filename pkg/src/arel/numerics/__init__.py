from .autodiff import NumericsError, Tape, Var
from .checkpoint import load_params, save_params
from .gradcheck import grad_check
from .kernels import conv1d_bank, gru_cell, softmax
from .optim import Adam, adam_step
from .params import ParamStore

__all__ = [
    "Adam",
    "NumericsError",
    "ParamStore",
    "Tape",
    "Var",
    "adam_step",
    "conv1d_bank",
    "grad_check",
    "gru_cell",
    "load_params",
    "save_params",
    "softmax",
]
