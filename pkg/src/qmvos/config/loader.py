"""
Configuration loader utilities.

Supports YAML files and line-based `key = value` text files.
"""

from pathlib import Path
from typing import Any

import yaml
from pydantic import ValidationError

from qmvos.core.exceptions import ConfigurationError, FormatError
from qmvos.config.settings import RunConfig

# YAML sections that only group keys; their children are RunConfig fields.
_SECTIONS = ("model", "queries", "memory", "ablation", "training")


def load_yaml_config(path: str | Path) -> dict[str, Any]:
    """
    Load configuration from a YAML file.

    Args:
        path: Path to YAML config file

    Returns:
        Flat configuration dictionary

    Raises:
        FileNotFoundError: If config file doesn't exist
        FormatError: If the file is not valid YAML
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")

    try:
        with open(path) as f:
            config = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise FormatError(path, f"invalid YAML: {e}") from e

    if config is None:
        return {}
    if not isinstance(config, dict):
        raise FormatError(path, "top level must be a mapping")
    return _flatten_config(config)


def _flatten_config(config: dict[str, Any], prefix: str = "") -> dict[str, Any]:
    """
    Flatten nested config into RunConfig field names.

    Converts:
        {"memory": {"mem_interval": 5}}
    To:
        {"mem_interval": 5}

    Unknown nested sections keep their name as a prefix so validation rejects them.
    """
    result: dict[str, Any] = {}

    for key, value in config.items():
        if isinstance(value, dict):
            if key in _SECTIONS and not prefix:
                result.update(_flatten_config(value, prefix))
            else:
                result.update(_flatten_config(value, f"{prefix}{key}_"))
        else:
            result[f"{prefix}{key}"] = value

    return result


def load_key_value_config(path: str | Path) -> dict[str, str]:
    """
    Load a line-based `key = value` config file.

    Blank lines and `#` comments are ignored. Values stay strings; RunConfig
    validation coerces them.

    Raises:
        FormatError: On a line without `=` or a repeated key
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")

    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(path, f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise FormatError(path, f"line {lineno}: empty key")
        if key in values:
            raise FormatError(path, f"line {lineno}: duplicate key '{key}'")
        values[key] = value
    return values


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Load a config file, choosing the parser from the suffix."""
    path = Path(path)
    if path.suffix.lower() in (".yaml", ".yml"):
        return load_yaml_config(path)
    return load_key_value_config(path)


def validate_run_config(values: dict[str, Any]) -> RunConfig:
    """
    Build a RunConfig, translating validation failures into ConfigurationError.

    The error names the first offending field; unknown keys are reported as such.
    """
    try:
        return RunConfig.model_validate(values)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or "heads"
        if first["type"] == "extra_forbidden":
            raise ConfigurationError(field, "unknown key") from e
        raise ConfigurationError(field, first["msg"]) from e


def load_run_config(path: str | Path) -> RunConfig:
    """Load and validate a RunConfig from a YAML or `key = value` file."""
    return validate_run_config(load_config_file(path))


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config_text(config: RunConfig) -> str:
    """Render a RunConfig as `key = value` lines in field order."""
    lines = [f"{key} = {_format_value(value)}" for key, value in config.model_dump().items()]
    return "\n".join(lines) + "\n"


def write_config(config: RunConfig, path: str | Path) -> Path:
    """Write a RunConfig in `key = value` form; re-reading yields an equal config."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_config_text(config))
    return path


def merge_configs(*configs: dict[str, Any]) -> dict[str, Any]:
    """
    Deep merge multiple configuration dictionaries.

    Later configs override earlier ones.

    Args:
        *configs: Configuration dictionaries to merge

    Returns:
        Merged configuration
    """
    result: dict[str, Any] = {}

    for config in configs:
        for key, value in config.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = merge_configs(result[key], value)
            else:
                result[key] = value

    return result
