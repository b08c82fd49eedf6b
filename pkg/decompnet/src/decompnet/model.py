"""The classifier: init block, TransConv stack, pooled MLP head."""

from __future__ import annotations

import torch
import torch.nn as nn

from .blocks import _CONV, _NORM, TransConvLayer
from .config import NetConfig

# Spatial averaging grid ahead of the head; fixed so the parameter count
# is independent of the input resolution.
HEAD_POOL = {2: (5, 5), 3: (2, 2, 2)}


class DecompositionNet(nn.Module):
    """Stacked transformer-style conv encoder over decomposed channel tensors."""

    def __init__(self, config: NetConfig, identity_norm: bool = False):
        super().__init__()
        self.config = config
        d = config.spatial_dims
        C = config.hidden_channels
        conv = _CONV[d]
        self.init_block = nn.Sequential(
            conv(config.in_channels, C, kernel_size=3, padding=1),
            nn.Identity() if identity_norm else _NORM[d](C),
            nn.ReLU(),
        )
        self.stack = nn.Sequential(
            *[
                TransConvLayer(C, config.heads, config.groups, d, identity_norm)
                for _ in range(config.layers)
            ]
        )
        self.pool = (nn.AdaptiveAvgPool2d if d == 2 else nn.AdaptiveAvgPool3d)(HEAD_POOL[d])
        pooled = C
        for s in HEAD_POOL[d]:
            pooled *= s
        self.head = nn.Sequential(
            nn.Flatten(),
            nn.Linear(pooled, C),
            nn.ReLU(),
            nn.Linear(C, config.num_classes),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = self.init_block(x)
        x = self.stack(x)
        x = self.pool(x)
        return self.head(x)


def build_model(config: NetConfig, identity_norm: bool = False) -> DecompositionNet:
    return DecompositionNet(config, identity_norm)


def parameter_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())
