"""
Affinity kernels between query pixels and memory pixels.

Both kernels use the 1/sqrt(C^k) temperature. Softmax over memory pixels turns
their logits into the affinity matrix.
"""

import math

from qmvos.core.registry import ComponentRegistry
from qmvos.tensorlab import ops
from qmvos.tensorlab.tensor import Tensor


@ComponentRegistry.register_affinity("dot")
class DotProductAffinity:
    """<q, k> / sqrt(C^k)."""

    @property
    def name(self) -> str:
        return "dot"

    def logits(self, query: Tensor, memory: Tensor) -> Tensor:
        scale = 1.0 / math.sqrt(query.shape[1])
        return ops.mul(ops.matmul(query, memory), scale)


@ComponentRegistry.register_affinity("l2")
class L2Affinity:
    """
    -|q - k|^2 / sqrt(C^k), dropping |q|^2 which is constant per query row.
    """

    @property
    def name(self) -> str:
        return "l2"

    def logits(self, query: Tensor, memory: Tensor) -> Tensor:
        scale = 1.0 / math.sqrt(query.shape[1])
        cross = ops.mul(ops.matmul(query, memory), 2.0)
        key_sq = ops.sum(ops.mul(memory, memory), axis=0, keepdims=True)
        return ops.mul(ops.sub(cross, key_sq), scale)


def affinity_from_logits(logits: Tensor) -> Tensor:
    """Row-wise softmax over memory pixels."""
    return ops.softmax(logits, axis=1)
