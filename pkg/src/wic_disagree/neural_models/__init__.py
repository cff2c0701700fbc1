"""From-scratch neural stack: layers, adapter blocks, AdamW, training loop.

Everything runs on float64 numpy arrays with hand-written backward passes;
parameters are checkpointed as float32 in a small versioned binary format.
"""

from .layers import Dropout, Gelu, LayerNorm, Linear, Parameter, gelu
from .models import (
    AdapterBlock,
    AdapterModel,
    LinearHeadModel,
    MlpHead,
    cross_entropy_loss,
    mse_loss,
)
from .optim import AdamW
from .training import (
    TrainConfig,
    EpochLog,
    TrainResult,
    make_model,
    predict_model,
    train_model,
)
from .checkpoint import load_model, save_model

__all__ = [
    "AdamW",
    "AdapterBlock",
    "AdapterModel",
    "Dropout",
    "EpochLog",
    "Gelu",
    "LayerNorm",
    "Linear",
    "LinearHeadModel",
    "MlpHead",
    "Parameter",
    "TrainConfig",
    "TrainResult",
    "cross_entropy_loss",
    "gelu",
    "load_model",
    "make_model",
    "mse_loss",
    "predict_model",
    "save_model",
    "train_model",
]
