"""
Shared fixtures: a narrow RunConfig, seeded weights and small synthetic videos.
"""

import numpy as np
import pytest

from qmvos.config import RunConfig
from qmvos.config import settings as settings_module
from qmvos.evalsynth import SyntheticVideo, gen_synthetic
from qmvos.pipelines import init_model_weights
from qmvos.tensorlab import ParamStore, seeded_rng

SMALL_WIDTHS = {
    "key_dim": 4,
    "value_dim": 8,
    "decoder_dim": 6,
    "c4": 4,
    "c8": 6,
    "c16": 8,
    "ffn_hidden": 12,
}


@pytest.fixture(autouse=True)
def _reset_settings():
    """Each test starts without a process-wide Settings instance."""
    settings_module._settings = None
    yield
    settings_module._settings = None


@pytest.fixture
def small_cfg() -> RunConfig:
    """Narrow model, memorise every other frame."""
    return RunConfig(**SMALL_WIDTHS, mem_interval=2, steps=3, seq_len=3, log_every=1)


@pytest.fixture
def small_weights(small_cfg: RunConfig) -> ParamStore:
    return init_model_weights(small_cfg)


@pytest.fixture
def rng() -> np.random.Generator:
    return seeded_rng(1234)


@pytest.fixture
def video() -> SyntheticVideo:
    """Two distinct objects, 6 frames of 32x32."""
    return gen_synthetic(seed=3, n_objects=2, n_frames=6, height=32, width=32)


@pytest.fixture
def similar_video() -> SyntheticVideo:
    return gen_synthetic(seed=5, n_objects=2, n_frames=5, height=32, width=32, scenario="similar")
