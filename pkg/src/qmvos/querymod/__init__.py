"""Object-query modules: SIM (initialisation + interaction) and QCIM."""

from qmvos.querymod.types import ObjectQuerySet
from qmvos.querymod.weights import (
    fuse_in_channels,
    querymod_param_shapes,
    init_querymod_weights,
)
from qmvos.querymod.sim import INIT_SCALES, fuse_scales, init_queries, sim_block, sim_interact
from qmvos.querymod.qcim import serialize_content, project_f16, qcim_block, qcim_refine

__all__ = [
    "ObjectQuerySet",
    "fuse_in_channels",
    "querymod_param_shapes",
    "init_querymod_weights",
    "INIT_SCALES",
    "fuse_scales",
    "init_queries",
    "sim_block",
    "sim_interact",
    "serialize_content",
    "project_f16",
    "qcim_block",
    "qcim_refine",
]
