"""
Whole-model weights: segmentation network plus query modules in one store.
"""

import logging
from pathlib import Path

from qmvos.config.settings import RunConfig
from qmvos.querymod.weights import init_querymod_weights, querymod_param_shapes
from qmvos.segnet.weights import init_net_weights, net_param_shapes
from qmvos.tensorlab.init import seeded_rng
from qmvos.tensorlab.optim import ParamStore
from qmvos.tensorlab.serialization import load_params

logger = logging.getLogger(__name__)


def model_param_shapes(cfg: RunConfig) -> dict[str, tuple[int, ...]]:
    """Every parameter the configured model needs."""
    return {**net_param_shapes(cfg), **querymod_param_shapes(cfg)}


def init_model_weights(cfg: RunConfig) -> ParamStore:
    """Seeded initialisation of all parameters (network first, then query modules)."""
    rng = seeded_rng(cfg.seed)
    store = init_net_weights(cfg, rng).merged(init_querymod_weights(cfg, rng))
    logger.info(f"🧮 Initialised {len(store)} parameter tensors (seed={cfg.seed})")
    return store


def load_model_weights(path: str | Path, cfg: RunConfig) -> ParamStore:
    """Load QMVW1 weights, checking names and shapes against the config."""
    return load_params(path, expected=model_param_shapes(cfg))
