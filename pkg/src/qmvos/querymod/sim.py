"""
Scale-aware Interaction Module.

Queries are initialised by mask-weighted pooling of a fused multi-scale
feature, then refined by self-attention across objects:

    F_fuse = Conv2(Concat(Conv1(Up(F16)), F8))
    X      = masked mean of F_fuse per object
    X^     = LN(SA(X) + X)
    X_sim  = LN(FFN(X^) + X^)
"""

import logging
from collections.abc import Mapping

import numpy as np

from qmvos.core.exceptions import ConfigurationError, ShapeError
from qmvos.querymod.blocks import add_norm, feed_forward, self_attention
from qmvos.querymod.types import ObjectQuerySet
from qmvos.tensorlab import ops
from qmvos.tensorlab.tensor import Tensor

logger = logging.getLogger(__name__)

Weights = Mapping[str, Tensor]

INIT_SCALES = ("f16_f8", "f16_f8_f4", "f16", "f8")


def _check_half(op: str, coarse: Tensor, fine: Tensor) -> None:
    if coarse.ndim != 3 or fine.ndim != 3:
        raise ShapeError(op, f"expected (C, H, W) maps, got {coarse.shape} and {fine.shape}")
    if (2 * coarse.shape[1], 2 * coarse.shape[2]) != fine.shape[1:]:
        raise ShapeError(op, f"extents {coarse.shape[1:]} are not half of {fine.shape[1:]}")


def fuse_scales(
    f16: Tensor,
    f8: Tensor,
    w: Weights,
    *,
    f4: Tensor | None = None,
    init_scales: str = "f16_f8",
) -> Tensor:
    """
    Fuse pyramid levels into a stride-8 map of C^v channels.

    Args:
        f16: (C16, h/2, w/2) features
        f8: (C8, h, w) features
        w: Bound query-module weights
        f4: (C4, 2h, 2w) features, required for "f16_f8_f4"
        init_scales: Which levels enter the fusion

    Returns:
        F_fuse of shape (C^v, h, w)
    """
    if init_scales not in INIT_SCALES:
        raise ConfigurationError("init_scales", f"unknown value '{init_scales}'")
    _check_half("fuse_scales", f16, f8)

    parts: list[Tensor] = []
    if init_scales != "f8":
        up = ops.bilinear_upsample2x(f16)
        parts.append(ops.conv1x1(up, w["sim.conv1.w"], w["sim.conv1.b"]))
    if init_scales != "f16":
        parts.append(f8)
    if init_scales == "f16_f8_f4":
        if f4 is None:
            raise ShapeError("fuse_scales", "f4 is required for f16_f8_f4 fusion")
        _check_half("fuse_scales", f8, f4)
        parts.append(ops.avg_pool(f4, 2))

    fused = parts[0] if len(parts) == 1 else ops.concat(parts, axis=0)
    return ops.conv1x1(fused, w["sim.conv2.w"], w["sim.conv2.b"])


def init_queries(f_fuse: Tensor, masks: Tensor | np.ndarray) -> ObjectQuerySet:
    """
    Mask-weighted average pooling of F_fuse, one query per object.

    Args:
        f_fuse: (C^v, h, w) fused features
        masks: (N, H, W) soft masks in [0, 1]; H/h must equal W/w and be an integer

    Returns:
        ObjectQuerySet; objects whose pooled mask sums to zero get a zero
        query and a set empty flag
    """
    masks = ops.constant(masks)
    if masks.ndim != 3 or masks.shape[0] < 1:
        raise ShapeError("init_queries", f"expected (N>=1, H, W) masks, got {masks.shape}")
    c, h, w = f_fuse.shape
    fh, fw = masks.shape[1] // h, masks.shape[2] // w
    if fh != fw or fh < 1 or (fh * h, fw * w) != masks.shape[1:]:
        raise ShapeError(
            "init_queries", f"mask extents {masks.shape[1:]} are not a multiple of {(h, w)}"
        )

    pooled = masks if fh == 1 else ops.avg_pool(masks, fh)
    n = masks.shape[0]
    weights = ops.reshape(pooled, (n, h * w))
    totals = ops.sum(weights, axis=1, keepdims=True)
    empty = totals.data[:, 0] == 0.0
    safe = ops.add(totals, ops.constant(empty[:, None].astype(np.float64)))
    features = ops.transpose(ops.reshape(f_fuse, (c, h * w)))
    q = ops.div(ops.matmul(weights, features), safe)

    if empty.any():
        logger.warning(f"⚠️  Empty object masks at indices {np.flatnonzero(empty).tolist()}")
    return ObjectQuerySet(q=q, empty_flags=tuple(bool(e) for e in empty))


def sim_block(
    x: Tensor, w: Weights, prefix: str, heads: int = 1, interact: bool = True
) -> Tensor:
    """One interaction block on an (N, C^v) query matrix."""
    attended = self_attention(x, w, f"{prefix}.sa", heads, interact)
    x_hat = add_norm(x, attended, w, f"{prefix}.ln1")
    return add_norm(x_hat, feed_forward(x_hat, w, f"{prefix}.ffn"), w, f"{prefix}.ln2")


def sim_interact(
    x: ObjectQuerySet,
    w: Weights,
    *,
    blocks: int = 1,
    heads: int = 1,
    interaction: bool = True,
) -> ObjectQuerySet:
    """
    Multi-object interaction.

    With `interaction` off, self-attention is restricted to each query itself
    and objects are processed independently.
    """
    q = x.q
    for i in range(blocks):
        q = sim_block(q, w, f"sim.block{i}", heads, interaction)
    return x.with_queries(q)
