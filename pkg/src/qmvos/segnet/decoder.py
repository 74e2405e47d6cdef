"""
FPN-style decoder: stride 16 -> 8 -> 4 by iterative upsampling and skip fusion.
"""

from dataclasses import dataclass

from qmvos.core.exceptions import InputError
from qmvos.segnet.encoder import FeaturePyramid
from qmvos.segnet.weights import Weights
from qmvos.tensorlab import ops
from qmvos.tensorlab.tensor import Tensor


@dataclass(frozen=True)
class DecoderFeature:
    """Decoder output d of shape (C_d, H/4, W/4) for one object."""

    d: Tensor


def decode(readout: Tensor, pyr: FeaturePyramid, w: Weights) -> DecoderFeature:
    """
    Decode one object's readout into a stride-4 feature map.

    Args:
        readout: (C^v, H/16, W/16) memory readout for the object
        pyr: Current frame's feature pyramid
        w: Bound network weights

    Returns:
        DecoderFeature of shape (C_d, H/4, W/4)
    """
    if readout.ndim != 3 or readout.shape[1:] != pyr.f16.shape[1:]:
        raise InputError(
            "readout", f"spatial extents {readout.shape[1:]} do not match f16 {pyr.f16.shape[1:]}"
        )

    fused = ops.concat([readout, pyr.f16], axis=0)
    d16 = ops.relu(ops.conv1x1(fused, w["decoder.in.w"], w["decoder.in.b"]))

    skip8 = ops.conv1x1(pyr.f8, w["decoder.skip8.w"], w["decoder.skip8.b"])
    d8 = ops.relu(ops.add(ops.bilinear_upsample2x(d16), skip8))
    d8 = ops.relu(ops.conv2d(d8, w["decoder.ref8.w"], w["decoder.ref8.b"], padding=1))

    skip4 = ops.conv1x1(pyr.f4, w["decoder.skip4.w"], w["decoder.skip4.b"])
    d4 = ops.relu(ops.add(ops.bilinear_upsample2x(d8), skip4))
    d4 = ops.conv2d(d4, w["decoder.ref4.w"], w["decoder.ref4.b"], padding=1)
    return DecoderFeature(d=d4)
