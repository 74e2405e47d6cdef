"""Configuration module exports."""

from qmvos.config.settings import (
    RunConfig,
    Settings,
    get_settings,
    configure,
)
from qmvos.config.loader import (
    load_yaml_config,
    load_key_value_config,
    load_config_file,
    load_run_config,
    validate_run_config,
    dump_config_text,
    write_config,
    merge_configs,
)

__all__ = [
    "RunConfig",
    "Settings",
    "get_settings",
    "configure",
    "load_yaml_config",
    "load_key_value_config",
    "load_config_file",
    "load_run_config",
    "validate_run_config",
    "dump_config_text",
    "write_config",
    "merge_configs",
]
