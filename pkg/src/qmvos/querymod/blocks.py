"""Attention, feed-forward and residual-norm pieces shared by SIM and QCIM."""

from collections.abc import Mapping

from qmvos.tensorlab import ops
from qmvos.tensorlab.tensor import Tensor

Weights = Mapping[str, Tensor]


def _attend(
    x: Tensor, memory: Tensor, w: Weights, prefix: str, heads: int, scaled: bool
) -> Tensor:
    wq, wk, wv = w[f"{prefix}.q.w"], w[f"{prefix}.k.w"], w[f"{prefix}.v.w"]
    if heads == 1:
        return ops.attention_layer(x, memory, wq, wk, wv, scale_by_sqrt_d=scaled)
    q, k, v = ops.matmul(x, wq), ops.matmul(memory, wk), ops.matmul(memory, wv)
    return ops.multi_head_attention(q, k, v, heads, scale_by_sqrt_d=scaled)


def self_attention(
    x: Tensor, w: Weights, prefix: str, heads: int, interact: bool = True
) -> Tensor:
    """
    Scaled self-attention across the rows of x.

    With `interact` off each row attends only to itself, so the output is the
    row's own value projection.
    """
    if not interact:
        return ops.matmul(x, w[f"{prefix}.v.w"])
    return _attend(x, x, w, prefix, heads, scaled=True)


def cross_attention(
    x: Tensor, content: Tensor, w: Weights, prefix: str, heads: int, scaled: bool = False
) -> Tensor:
    """Rows of x attend over the rows of `content`; unscaled by default."""
    return _attend(x, content, w, prefix, heads, scaled)


def add_norm(residual: Tensor, update: Tensor, w: Weights, prefix: str) -> Tensor:
    """LN(update + residual)."""
    return ops.residual_layer_norm(update, residual, w[f"{prefix}.g"], w[f"{prefix}.b"])


def feed_forward(x: Tensor, w: Weights, prefix: str) -> Tensor:
    w1, b1 = w[f"{prefix}.w1"], w[f"{prefix}.b1"]
    return ops.ffn(x, w1, b1, w[f"{prefix}.w2"], w[f"{prefix}.b2"])
