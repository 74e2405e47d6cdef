"""
Mask heads.

`predict_masks` uses each object's query as a dynamic filter on its decoder
feature. `predict_static` is the query-free baseline with one learned filter.
Channel 0 is background with a constant zero logit.
"""

from collections.abc import Sequence

import numpy as np

from qmvos.core.exceptions import ContractError
from qmvos.querymod.types import ObjectQuerySet
from qmvos.segnet.decoder import DecoderFeature
from qmvos.segnet.weights import Weights
from qmvos.tensorlab import ops
from qmvos.tensorlab.tensor import Tensor


def _with_background(object_logits: list[Tensor]) -> Tensor:
    h, w = object_logits[0].shape[1:]
    return ops.concat([ops.constant(np.zeros((1, h, w)))] + object_logits, axis=0)


def _flatten(feature: DecoderFeature) -> Tensor:
    c, h, w = feature.d.shape
    return ops.reshape(feature.d, (c, h * w))


def project_queries(queries: ObjectQuerySet | Tensor, w: Weights) -> Tensor:
    """Map (N, C^v) queries to (N, C_d) dynamic filters."""
    q = queries.q if isinstance(queries, ObjectQuerySet) else queries
    return ops.matmul(q, w["head.proj.w"])


def apply_filters(dec_feats: Sequence[DecoderFeature], filters: Tensor) -> Tensor:
    """
    Per-pixel dot product of filter n with decoder feature n.

    Returns:
        (N+1, H/4, W/4) logits, background first
    """
    n = len(dec_feats)
    if n == 0:
        raise ContractError("predict_masks", "no objects to predict")
    if filters.shape[0] != n:
        raise ContractError("predict_masks", f"{filters.shape[0]} filters for {n} features")

    h, wd = dec_feats[0].d.shape[1:]
    logits = []
    for i, feature in enumerate(dec_feats):
        row = ops.index(filters, (slice(i, i + 1), slice(None)))
        logits.append(ops.reshape(ops.matmul(row, _flatten(feature)), (1, h, wd)))
    return _with_background(logits)


def predict_masks(
    dec_feats: Sequence[DecoderFeature],
    queries: ObjectQuerySet | Tensor,
    w: Weights,
) -> Tensor:
    """
    Dynamic-filter mask logits.

    Object n's logit at pixel p is <q_n P, d_n(p)> with P the learned
    C^v -> C_d projection.

    Args:
        dec_feats: One decoder feature per object
        queries: N queries (an ObjectQuerySet or an (N, C^v) tensor)
        w: Bound network weights

    Returns:
        (N+1, H/4, W/4) logits, background first
    """
    if not dec_feats:
        raise ContractError("predict_masks", "no objects to predict")
    return apply_filters(dec_feats, project_queries(queries, w))


def predict_static(dec_feats: Sequence[DecoderFeature], w: Weights) -> Tensor:
    """Baseline logits from a single learned 1x1 filter shared by all objects."""
    if not dec_feats:
        raise ContractError("predict_static", "no objects to predict")
    logits = [ops.conv1x1(f.d, w["head.static.w"], w["head.static.b"]) for f in dec_feats]
    return _with_background(logits)


def mask_probabilities(logits: Tensor) -> Tensor:
    """Softmax over the N+1 channels."""
    return ops.softmax(logits, axis=0)
