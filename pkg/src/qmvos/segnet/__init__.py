"""Segmentation network: encoders, decoder and mask heads."""

from qmvos.segnet.weights import (
    Weights,
    NetWeights,
    net_param_shapes,
    init_net_weights,
)
from qmvos.segnet.encoder import (
    FeaturePyramid,
    check_image,
    encode_frame,
    encode_mask,
    project_key,
)
from qmvos.segnet.decoder import DecoderFeature, decode
from qmvos.segnet.head import (
    project_queries,
    apply_filters,
    predict_masks,
    predict_static,
    mask_probabilities,
)

__all__ = [
    "Weights",
    "NetWeights",
    "net_param_shapes",
    "init_net_weights",
    "FeaturePyramid",
    "check_image",
    "encode_frame",
    "encode_mask",
    "project_key",
    "DecoderFeature",
    "decode",
    "project_queries",
    "apply_filters",
    "predict_masks",
    "predict_static",
    "mask_probabilities",
]
