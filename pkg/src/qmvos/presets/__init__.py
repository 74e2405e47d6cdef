"""Presets module exports."""

from qmvos.presets.ablation import (
    ABLATION_PRESETS,
    BASELINE,
    CROSS_F16,
    FIRST_FRAME_QUERIES,
    FULL,
    INIT_F8,
    INIT_F16,
    INIT_F16_F8_F4,
    NO_INTERACTION,
    SCALED_CROSS,
    AblationPreset,
    get_preset,
    list_presets,
)

__all__ = [
    "AblationPreset",
    "ABLATION_PRESETS",
    "get_preset",
    "list_presets",
    # Named presets
    "FULL",
    "NO_INTERACTION",
    "CROSS_F16",
    "FIRST_FRAME_QUERIES",
    "INIT_F16_F8_F4",
    "INIT_F16",
    "INIT_F8",
    "SCALED_CROSS",
    "BASELINE",
]
