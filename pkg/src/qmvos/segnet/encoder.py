"""
Frame and mask encoders.

The frame encoder is three strided-convolution stages producing features at
strides 4, 8 and 16. The mask encoder turns an (image, object mask) pair into
a memory value at stride 16.
"""

from dataclasses import dataclass

import numpy as np

from qmvos.core.exceptions import InputError
from qmvos.segnet.weights import ENCODER_LAYERS, MASK_ENCODER_LAYERS, Weights
from qmvos.tensorlab import ops
from qmvos.tensorlab.tensor import Tensor

STRIDE = 16


@dataclass(frozen=True)
class FeaturePyramid:
    """Features at strides 4, 8 and 16."""

    f4: Tensor
    f8: Tensor
    f16: Tensor


def check_image(image: Tensor) -> tuple[int, int]:
    """
    Validate a 3xHxW image with sides that are positive multiples of 16.

    Returns:
        (H, W)

    Raises:
        InputError: On a bad shape or pixel values outside [0, 1]
    """
    if image.ndim != 3 or image.shape[0] != 3:
        raise InputError("image", f"expected shape (3, H, W), got {image.shape}")
    h, w = image.shape[1:]
    if h == 0 or w == 0 or h % STRIDE or w % STRIDE:
        raise InputError("image", f"sides must be positive multiples of {STRIDE}, got {h}x{w}")
    if image.size and (np.min(image.data) < 0.0 or np.max(image.data) > 1.0):
        raise InputError("image", "pixel values must lie in [0, 1]")
    return h, w


def encode_frame(image: Tensor, w: Weights) -> FeaturePyramid:
    """
    Encode an image into its feature pyramid.

    Args:
        image: (3, H, W) in [0, 1], H and W multiples of 16
        w: Bound network weights

    Returns:
        FeaturePyramid with f4 (C4, H/4, W/4), f8 (C8, H/8, W/8), f16 (C16, H/16, W/16)
    """
    check_image(image)
    x = image
    outputs = {}
    for name, stride in ENCODER_LAYERS:
        x = ops.relu(ops.conv2d(x, w[f"{name}.w"], w[f"{name}.b"], stride=stride, padding=1))
        outputs[name] = x
    return FeaturePyramid(
        f4=outputs["encoder.s1b"],
        f8=outputs["encoder.s2b"],
        f16=outputs["encoder.s3b"],
    )


def project_key(f16: Tensor, w: Weights) -> Tensor:
    """Memory key (C^k, H/16, W/16) from stride-16 features."""
    return ops.conv1x1(f16, w["encoder.key.w"], w["encoder.key.b"])


def encode_mask(image: Tensor, object_mask: Tensor, w: Weights) -> Tensor:
    """
    Encode one object's mask together with its frame into a memory value.

    Args:
        image: (3, H, W) frame
        object_mask: (1, H, W) soft mask in [0, 1]
        w: Bound network weights

    Returns:
        (C^v, H/16, W/16) value slab
    """
    h, wd = check_image(image)
    if object_mask.shape != (1, h, wd):
        raise InputError("object_mask", f"expected shape (1, {h}, {wd}), got {object_mask.shape}")
    x = ops.concat([image, object_mask], axis=0)
    last = len(MASK_ENCODER_LAYERS) - 1
    for i, name in enumerate(MASK_ENCODER_LAYERS):
        x = ops.conv2d(x, w[f"{name}.w"], w[f"{name}.b"], stride=2, padding=1)
        if i < last:
            x = ops.relu(x)
    return x
