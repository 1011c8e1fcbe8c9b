from .adam import Adam
from .checkpoint import load_networks, save_networks
from .layers import (
    BatchNorm,
    Dropout,
    GroupNorm,
    Layer,
    LayerNorm,
    LayerNormNoVR,
    Linear,
    ReLU,
    layer_from_spec,
)
from .network import Mode, Network
from .tensor import Tensor

__all__ = [
    "Adam",
    "BatchNorm",
    "Dropout",
    "GroupNorm",
    "Layer",
    "LayerNorm",
    "LayerNormNoVR",
    "Linear",
    "Mode",
    "Network",
    "ReLU",
    "Tensor",
    "layer_from_spec",
    "load_networks",
    "save_networks",
]
