"""
Ablation presets.

Each preset names one arm of the ablation study as a set of RunConfig
overrides applied on top of a base config.
"""

from dataclasses import dataclass, field
from typing import Any

from qmvos.config.settings import RunConfig
from qmvos.core.exceptions import ConfigurationError


@dataclass(frozen=True)
class AblationPreset:
    """
    One ablation arm.

    Attributes:
        name: Preset identifier
        description: What the arm changes
        overrides: RunConfig fields set by the arm
    """

    name: str
    description: str
    overrides: dict[str, Any] = field(default_factory=dict)

    def apply(self, cfg: RunConfig) -> RunConfig:
        """Return cfg with this arm's overrides."""
        return cfg.model_copy(update=self.overrides)


# === Ablation Presets ===

FULL = AblationPreset(
    name="full",
    description="Full model: F16+F8 init, interaction on, readout cross source, propagation",
)

NO_INTERACTION = AblationPreset(
    name="no-interaction",
    description="SIM without multi-object self-attention",
    overrides={"sim_interaction": False},
)

CROSS_F16 = AblationPreset(
    name="cross-f16",
    description="QCIM attends to the projected F16 feature instead of readout",
    overrides={"cross_source": "f16"},
)

FIRST_FRAME_QUERIES = AblationPreset(
    name="first-frame-queries",
    description="Keep the queries built from the annotated frame",
    overrides={"query_propagation": "first_frame"},
)

INIT_F16_F8_F4 = AblationPreset(
    name="init-f16-f8-f4",
    description="Queries initialised from F16+F8+F4",
    overrides={"init_scales": "f16_f8_f4"},
)

INIT_F16 = AblationPreset(
    name="init-f16",
    description="Queries initialised from F16 only",
    overrides={"init_scales": "f16"},
)

INIT_F8 = AblationPreset(
    name="init-f8",
    description="Queries initialised from F8 only",
    overrides={"init_scales": "f8"},
)

SCALED_CROSS = AblationPreset(
    name="scaled-cross",
    description="QCIM cross-attention with 1/sqrt(d) scaling",
    overrides={"cross_attention_scaling": True},
)

BASELINE = AblationPreset(
    name="baseline",
    description="No query modules; static per-object head",
    overrides={"querymod_enabled": False},
)


ABLATION_PRESETS: dict[str, AblationPreset] = {
    preset.name: preset
    for preset in [
        FULL,
        NO_INTERACTION,
        CROSS_F16,
        FIRST_FRAME_QUERIES,
        INIT_F16_F8_F4,
        INIT_F16,
        INIT_F8,
        SCALED_CROSS,
        BASELINE,
    ]
}


def get_preset(name: str) -> AblationPreset:
    """
    Get an ablation preset by name.

    Raises:
        ConfigurationError: If the preset is unknown
    """
    if name not in ABLATION_PRESETS:
        available = list(ABLATION_PRESETS.keys())
        raise ConfigurationError("preset", f"'{name}' not found. Available: {available}")
    return ABLATION_PRESETS[name]


def list_presets() -> list[str]:
    """List all available preset names."""
    return list(ABLATION_PRESETS.keys())
