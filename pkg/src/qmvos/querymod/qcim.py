"""
Query-Content Interaction Module.

    X'     = LN(SA(X_sim) + X_sim)
    X''    = LN(CA(X', M) + X')
    X_qcim = LN(FFN(X'') + X'')

M is the content serialised to rows: the memory readout of all objects
(N*H*W rows), or the current frame's projected F16 (H*W rows).
"""

from collections.abc import Mapping

from qmvos.core.exceptions import PreconditionError, ShapeError
from qmvos.querymod.blocks import add_norm, cross_attention, feed_forward, self_attention
from qmvos.querymod.types import ObjectQuerySet
from qmvos.tensorlab import ops
from qmvos.tensorlab.tensor import Tensor

Weights = Mapping[str, Tensor]


def serialize_content(content: Tensor) -> Tensor:
    """
    Flatten content to rows of C^v.

    (N, C, H, W) readout -> (N*H*W, C), object-major; (C, H, W) -> (H*W, C).
    """
    if content.ndim == 4:
        n, c, h, w = content.shape
        return ops.reshape(ops.transpose(content, (0, 2, 3, 1)), (n * h * w, c))
    if content.ndim == 3:
        c, h, w = content.shape
        return ops.transpose(ops.reshape(content, (c, h * w)))
    raise ShapeError("serialize_content", f"expected rank 3 or 4 content, got {content.shape}")


def project_f16(f16: Tensor, w: Weights) -> Tensor:
    """Map C16 features to C^v for use as cross-attention content."""
    return ops.conv1x1(f16, w["qcim.f16_proj.w"], w["qcim.f16_proj.b"])


def qcim_block(
    x: Tensor, content: Tensor, w: Weights, prefix: str, heads: int = 1, scaled: bool = False
) -> Tensor:
    """One QCIM block on (N, C^v) queries and (M, C^v) content rows."""
    x1 = add_norm(x, self_attention(x, w, f"{prefix}.sa", heads), w, f"{prefix}.ln1")
    crossed = cross_attention(x1, content, w, f"{prefix}.ca", heads, scaled)
    x2 = add_norm(x1, crossed, w, f"{prefix}.ln2")
    return add_norm(x2, feed_forward(x2, w, f"{prefix}.ffn"), w, f"{prefix}.ln3")


def qcim_refine(
    x_sim: ObjectQuerySet,
    readout: Tensor,
    w: Weights,
    *,
    blocks: int = 1,
    heads: int = 1,
    scaled: bool = False,
) -> ObjectQuerySet:
    """
    Refine queries against the current frame's content.

    Args:
        x_sim: Queries from SIM
        readout: (N, C^v, H, W) memory readout, or (C^v, H, W) projected features
        w: Bound query-module weights
        blocks: Number of stacked blocks
        heads: Attention heads
        scaled: Apply 1/sqrt(d) in cross-attention

    Raises:
        ShapeError: If a 4-D readout's object count differs from the queries
        PreconditionError: If the content has no rows
    """
    if readout.ndim == 4 and readout.shape[0] != x_sim.n_objects:
        raise ShapeError(
            "qcim_refine", f"readout has {readout.shape[0]} objects, queries {x_sim.n_objects}"
        )
    content = serialize_content(readout)
    if content.shape[0] == 0:
        raise PreconditionError("qcim_refine", "content has no rows")

    q = x_sim.q
    for i in range(blocks):
        q = qcim_block(q, content, w, f"qcim.block{i}", heads, scaled)
    return x_sim.with_queries(q)
