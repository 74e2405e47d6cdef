"""
Query-module parameters.

SIM: `sim.conv1`, `sim.conv2` (scale fusion) and `sim.block{i}.*` (interaction).
QCIM: `qcim.block{i}.*`, plus `qcim.f16_proj` when queries cross-attend to F16.
Attention projections carry no bias.
"""

import logging

import numpy as np

from qmvos.config.settings import RunConfig
from qmvos.tensorlab.init import he_normal, xavier_normal
from qmvos.tensorlab.optim import ParamStore

logger = logging.getLogger(__name__)


def fuse_in_channels(cfg: RunConfig) -> int:
    """Input width of sim.conv2 for the configured initialisation scales."""
    widths = {
        "f16_f8": 2 * cfg.c8,
        "f16_f8_f4": 2 * cfg.c8 + cfg.c4,
        "f16": cfg.c8,
        "f8": cfg.c8,
    }
    return widths[cfg.init_scales]


def _block_shapes(prefix: str, attn: tuple[str, ...], norms: int, cfg: RunConfig) -> dict:
    cv, hidden = cfg.value_dim, cfg.ffn_hidden
    shapes: dict[str, tuple[int, ...]] = {}
    for a in attn:
        for proj in ("q", "k", "v"):
            shapes[f"{prefix}.{a}.{proj}.w"] = (cv, cv)
    for i in range(1, norms + 1):
        shapes[f"{prefix}.ln{i}.g"] = (cv,)
        shapes[f"{prefix}.ln{i}.b"] = (cv,)
    shapes[f"{prefix}.ffn.w1"] = (cv, hidden)
    shapes[f"{prefix}.ffn.b1"] = (hidden,)
    shapes[f"{prefix}.ffn.w2"] = (hidden, cv)
    shapes[f"{prefix}.ffn.b2"] = (cv,)
    return shapes


def querymod_param_shapes(cfg: RunConfig) -> dict[str, tuple[int, ...]]:
    """Name -> shape for every SIM and QCIM parameter."""
    cv = cfg.value_dim
    shapes: dict[str, tuple[int, ...]] = {}
    if cfg.init_scales != "f8":
        shapes["sim.conv1.w"] = (cfg.c8, cfg.c16)
        shapes["sim.conv1.b"] = (cfg.c8,)
    shapes["sim.conv2.w"] = (cv, fuse_in_channels(cfg))
    shapes["sim.conv2.b"] = (cv,)
    for i in range(cfg.sim_blocks):
        shapes.update(_block_shapes(f"sim.block{i}", ("sa",), 2, cfg))
    for i in range(cfg.qcim_blocks):
        shapes.update(_block_shapes(f"qcim.block{i}", ("sa", "ca"), 3, cfg))
    if cfg.cross_source == "f16":
        shapes["qcim.f16_proj.w"] = (cv, cfg.c16)
        shapes["qcim.f16_proj.b"] = (cv,)
    return shapes


def init_querymod_weights(cfg: RunConfig, rng: np.random.Generator) -> ParamStore:
    """
    Randomly initialise SIM and QCIM.

    Attention projections are Xavier-normal, convolutions and FFN layers
    He-normal, layer-norm gains one, every bias zero.
    """
    arrays: dict[str, np.ndarray] = {}
    for name, shape in sorted(querymod_param_shapes(cfg).items()):
        leaf = name.rsplit(".", 1)[-1]
        if leaf == "g":
            arrays[name] = np.ones(shape)
        elif leaf in ("b", "b1", "b2"):
            arrays[name] = np.zeros(shape)
        elif leaf in ("w1", "w2"):
            arrays[name] = he_normal(rng, shape, fan_in=shape[0])
        elif ".sa." in name or ".ca." in name:
            arrays[name] = xavier_normal(rng, shape)  # type: ignore[arg-type]
        else:
            arrays[name] = he_normal(rng, shape)
    logger.debug(f"Initialised {len(arrays)} query-module parameters")
    return ParamStore.from_arrays(arrays)
