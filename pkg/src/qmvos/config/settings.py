"""
Configuration settings using Pydantic.

RunConfig holds everything that changes what a run computes; Settings adds the
ambient knobs (logging, output location) and loads from environment variables.
"""

from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from qmvos.core.exceptions import ConfigurationError


class RunConfig(BaseModel):
    """
    Model widths, memory policy, ablation switches and training knobs.

    Example:
        >>> cfg = RunConfig(mem_interval=3, sim_interaction=False)
        >>> cfg.value_dim
        64
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    # Channel widths (C^k, C^v, C_d and the pyramid)
    key_dim: int = Field(default=32, gt=0)
    value_dim: int = Field(default=64, gt=0)
    decoder_dim: int = Field(default=32, gt=0)
    c4: int = Field(default=32, gt=0)
    c8: int = Field(default=64, gt=0)
    c16: int = Field(default=64, gt=0)
    ffn_hidden: int = Field(default=128, gt=0)

    # Query modules
    heads: int = Field(default=1, gt=0)
    sim_blocks: int = Field(default=1, gt=0)
    qcim_blocks: int = Field(default=1, gt=0)

    # Memory
    mem_interval: int = Field(default=5, ge=1)
    affinity: Literal["dot", "l2"] = "dot"

    # Ablation switches
    init_scales: Literal["f16_f8", "f16_f8_f4", "f16", "f8"] = "f16_f8"
    sim_interaction: bool = True
    cross_source: Literal["readout", "f16"] = "readout"
    query_propagation: Literal["propagate", "first_frame"] = "propagate"
    cross_attention_scaling: bool = False
    querymod_enabled: bool = True

    # Training
    seed: int = 0
    lr: float = Field(default=3e-4, ge=0.0)
    weight_decay: float = Field(default=0.01, ge=0.0)
    steps: int = Field(default=1000, ge=0)
    seq_len: int = Field(default=8, ge=2)
    log_every: int = Field(default=50, gt=0)

    @model_validator(mode="after")
    def _check_heads(self) -> "RunConfig":
        if self.value_dim % self.heads != 0:
            raise ValueError(f"heads={self.heads} must divide value_dim={self.value_dim}")
        return self


class Settings(BaseSettings):
    """
    Main application settings.

    Loads from environment variables (prefix QMVOS_) and an optional .env file.

    Example:
        >>> settings = Settings()
        >>> print(settings.run.mem_interval)
        >>> print(settings.output_dir)
    """

    # Project
    project_name: str = "qmvos"
    version: str = "0.1.0"

    # Paths
    output_dir: Path = Path("./runs")
    config_path: Path | None = None

    # Logging
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"

    # Nested settings
    run: RunConfig = Field(default_factory=RunConfig)

    model_config = SettingsConfigDict(
        env_prefix="QMVOS_",
        env_file=".env",
        env_file_encoding="utf-8",
        env_nested_delimiter="__",
        extra="ignore",
    )


# Global settings instance (lazy-loaded)
_settings: Settings | None = None


def get_settings() -> Settings:
    """
    Get the global settings instance.

    Returns:
        Configured Settings instance
    """
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def configure(config_path: str | Path | None = None, **overrides: Any) -> Settings:
    """
    Configure settings with an optional run-config file and overrides.

    Args:
        config_path: Path to a YAML or `key = value` run config
        **overrides: RunConfig field overrides (take precedence over the file)

    Returns:
        Configured Settings instance
    """
    global _settings

    from qmvos.config.loader import load_config_file, merge_configs, validate_run_config

    try:
        base = Settings()
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"])
        raise ConfigurationError(field, f"environment: {first['msg']}") from e

    file_values: dict[str, Any] = {}
    if config_path:
        file_values = load_config_file(config_path)

    # Precedence: overrides > file > environment > defaults
    run = validate_run_config(merge_configs(base.run.model_dump(), file_values, overrides))
    _settings = base.model_copy(
        update={"run": run, "config_path": Path(config_path) if config_path else None}
    )
    return _settings
