"""
Segmentation network parameters.

Naming: `<block>.<layer>.w|b`. Convolution weights are (out, in, k, k), 1x1
maps are (out, in).
"""

import logging
from collections.abc import Mapping

import numpy as np

from qmvos.config.settings import RunConfig
from qmvos.tensorlab.init import he_normal, xavier_normal
from qmvos.tensorlab.optim import ParamStore
from qmvos.tensorlab.tensor import Tensor

logger = logging.getLogger(__name__)

# Bound (tensor) view of a parameter store, as produced by ParamStore.bind.
Weights = Mapping[str, Tensor]

# Persisted form.
NetWeights = ParamStore

# (name, stride) for the six encoder convolutions, two per stage.
ENCODER_LAYERS = (
    ("encoder.s1a", 2),
    ("encoder.s1b", 2),
    ("encoder.s2a", 2),
    ("encoder.s2b", 1),
    ("encoder.s3a", 2),
    ("encoder.s3b", 1),
)

MASK_ENCODER_LAYERS = ("mask_encoder.l1", "mask_encoder.l2", "mask_encoder.l3", "mask_encoder.l4")


def net_param_shapes(cfg: RunConfig) -> dict[str, tuple[int, ...]]:
    """Name -> shape for every encoder, decoder and head parameter."""
    c4h = max(1, cfg.c4 // 2)
    cv, cd = cfg.value_dim, cfg.decoder_dim
    shapes: dict[str, tuple[int, ...]] = {}

    encoder_io = [
        (3, c4h),
        (c4h, cfg.c4),
        (cfg.c4, cfg.c8),
        (cfg.c8, cfg.c8),
        (cfg.c8, cfg.c16),
        (cfg.c16, cfg.c16),
    ]
    for (name, _), (c_in, c_out) in zip(ENCODER_LAYERS, encoder_io, strict=True):
        shapes[f"{name}.w"] = (c_out, c_in, 3, 3)
        shapes[f"{name}.b"] = (c_out,)
    shapes["encoder.key.w"] = (cfg.key_dim, cfg.c16)
    shapes["encoder.key.b"] = (cfg.key_dim,)

    mask_io = [(4, c4h), (c4h, cfg.c4), (cfg.c4, cfg.c8), (cfg.c8, cv)]
    for name, (c_in, c_out) in zip(MASK_ENCODER_LAYERS, mask_io, strict=True):
        shapes[f"{name}.w"] = (c_out, c_in, 3, 3)
        shapes[f"{name}.b"] = (c_out,)

    shapes["decoder.in.w"] = (cd, cv + cfg.c16)
    shapes["decoder.in.b"] = (cd,)
    shapes["decoder.skip8.w"] = (cd, cfg.c8)
    shapes["decoder.skip8.b"] = (cd,)
    shapes["decoder.skip4.w"] = (cd, cfg.c4)
    shapes["decoder.skip4.b"] = (cd,)
    for name in ("decoder.ref8", "decoder.ref4"):
        shapes[f"{name}.w"] = (cd, cd, 3, 3)
        shapes[f"{name}.b"] = (cd,)

    shapes["head.proj.w"] = (cv, cd)
    shapes["head.static.w"] = (1, cd)
    shapes["head.static.b"] = (1,)
    return shapes


def init_net_weights(cfg: RunConfig, rng: np.random.Generator) -> ParamStore:
    """
    Randomly initialise the segmentation network.

    Weights are He-normal (Xavier for the key and query projections); biases
    start at zero. Draw order follows sorted parameter names.
    """
    arrays: dict[str, np.ndarray] = {}
    for name, shape in sorted(net_param_shapes(cfg).items()):
        if name.endswith(".b"):
            arrays[name] = np.zeros(shape)
        elif name in ("encoder.key.w", "head.proj.w"):
            arrays[name] = xavier_normal(rng, shape)  # type: ignore[arg-type]
        else:
            arrays[name] = he_normal(rng, shape)
    logger.debug(f"Initialised {len(arrays)} network parameters")
    return ParamStore.from_arrays(arrays)
