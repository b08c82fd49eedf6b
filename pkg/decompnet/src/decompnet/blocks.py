"""Convolutional blocks mirroring a transformer encoder layer.

MultiHeadConv stands in for multi-head attention (grouped spatial
convolution fanning out to heads * C channels, fused back by a 1x1
convolution); FeedForwardConv stands in for the position-wise MLP (two
1x1 group convolutions around a ReLU).  A TransConvLayer wraps both in
residual connections with batch norm and finishes with 2x max pooling.
"""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F

_CONV = {2: nn.Conv2d, 3: nn.Conv3d}
_NORM = {2: nn.BatchNorm2d, 3: nn.BatchNorm3d}


class MultiHeadConv(nn.Module):
    """Grouped 3-conv to heads*C channels, ReLU, 1x1 fusion back to C."""

    def __init__(self, channels: int, heads: int, spatial_dims: int = 2):
        super().__init__()
        conv = _CONV[spatial_dims]
        self.expand = conv(channels, channels * heads, kernel_size=3, padding=1, groups=heads)
        self.fuse = conv(channels * heads, channels, kernel_size=1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.fuse(F.relu(self.expand(x)))


class FeedForwardConv(nn.Module):
    """1x1 group conv to 2C channels, ReLU, 1x1 group conv back to C."""

    def __init__(self, channels: int, groups: int, spatial_dims: int = 2):
        super().__init__()
        conv = _CONV[spatial_dims]
        self.widen = conv(channels, 2 * channels, kernel_size=1, groups=groups)
        self.narrow = conv(2 * channels, channels, kernel_size=1, groups=groups)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.narrow(F.relu(self.widen(x)))


def floor_halving_pool(x: torch.Tensor) -> torch.Tensor:
    """2x max pooling with floor semantics; extents of 1 pass through."""
    spatial = x.shape[2:]
    kernel = tuple(2 if s >= 2 else 1 for s in spatial)
    if all(k == 1 for k in kernel):
        return x
    pool = F.max_pool2d if x.dim() == 4 else F.max_pool3d
    return pool(x, kernel_size=kernel, stride=kernel)


class TransConvLayer(nn.Module):
    """Norm(x + MultiHeadConv(x)) -> Norm(. + FeedForwardConv(.)) -> MaxPool.

    `identity_norm=True` swaps the batch norms for identities, exposing the
    bare residual structure (used by the init-check tests).
    """

    def __init__(
        self,
        channels: int,
        heads: int,
        groups: int,
        spatial_dims: int = 2,
        identity_norm: bool = False,
    ):
        super().__init__()
        self.attention = MultiHeadConv(channels, heads, spatial_dims)
        self.feed_forward = FeedForwardConv(channels, groups, spatial_dims)
        norm = nn.Identity if identity_norm else _NORM[spatial_dims]
        self.norm1 = norm(channels)
        self.norm2 = norm(channels)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = self.norm1(x + self.attention(x))
        x = self.norm2(x + self.feed_forward(x))
        return floor_halving_pool(x)
