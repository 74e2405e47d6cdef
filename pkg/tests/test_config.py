"""
Tests for RunConfig validation, config files and Settings.
"""

from pathlib import Path

import pytest
from pydantic import ValidationError

from qmvos.config import (
    RunConfig,
    configure,
    dump_config_text,
    get_settings,
    load_key_value_config,
    load_run_config,
    load_yaml_config,
    merge_configs,
    write_config,
)
from qmvos.core import ConfigurationError, FormatError

DEFAULT_YAML = Path(__file__).resolve().parents[1] / "configs" / "default.yaml"


class TestRunConfig:
    """Defaults and validation."""

    def test_defaults(self):
        cfg = RunConfig()
        assert (cfg.key_dim, cfg.value_dim, cfg.decoder_dim) == (32, 64, 32)
        assert cfg.mem_interval == 5
        assert cfg.sim_interaction and cfg.querymod_enabled
        assert not cfg.cross_attention_scaling
        assert cfg.lr == 3e-4 and cfg.seq_len == 8

    def test_frozen(self):
        with pytest.raises(ValidationError):
            RunConfig().mem_interval = 3  # type: ignore[misc]

    @pytest.mark.parametrize(
        "field, value",
        [("mem_interval", 0), ("value_dim", 0), ("seq_len", 1), ("heads", 3)],
    )
    def test_rejects_invalid(self, field, value):
        with pytest.raises(ValidationError):
            RunConfig(**{field: value})

    def test_rejects_unknown_field(self):
        with pytest.raises(ValidationError):
            RunConfig(sim_interactoin=False)


class TestConfigFiles:
    """key = value and YAML loading."""

    def test_key_value_round_trip(self, tmp_path):
        cfg = RunConfig(mem_interval=3, sim_interaction=False, lr=1e-3, init_scales="f16")
        path = write_config(cfg, tmp_path / "run.cfg")
        assert load_run_config(path) == cfg
        assert dump_config_text(load_run_config(path)) == path.read_text()

    def test_comments_and_blank_lines(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# widths\n\nkey_dim = 16   # C^k\ncross_source = f16\n")
        cfg = load_run_config(path)
        assert cfg.key_dim == 16
        assert cfg.cross_source == "f16"

    def test_unknown_key_is_named(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("sim_interactoin = false\n")
        with pytest.raises(ConfigurationError, match="sim_interactoin"):
            load_run_config(path)

    def test_invalid_value_is_named(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("mem_interval = 0\n")
        with pytest.raises(ConfigurationError, match="mem_interval"):
            load_run_config(path)

    def test_line_without_equals(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("mem_interval 3\n")
        with pytest.raises(FormatError, match="line 1"):
            load_key_value_config(path)

    def test_duplicate_key(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("seed = 1\nseed = 2\n")
        with pytest.raises(FormatError, match="duplicate"):
            load_key_value_config(path)

    def test_yaml_sections_flatten(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("memory:\n  mem_interval: 2\nablation:\n  sim_interaction: false\n")
        assert load_yaml_config(path) == {"mem_interval": 2, "sim_interaction": False}

    def test_yaml_unknown_section_is_rejected(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("optimizer:\n  lr: 0.1\n")
        with pytest.raises(ConfigurationError, match="optimizer_lr"):
            load_run_config(path)

    def test_default_yaml_matches_defaults(self):
        assert load_run_config(DEFAULT_YAML) == RunConfig()

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_run_config(tmp_path / "none.cfg")

    def test_merge_configs_later_wins(self):
        merged = merge_configs({"a": 1, "n": {"x": 1, "y": 2}}, {"n": {"y": 3}})
        assert merged == {"a": 1, "n": {"x": 1, "y": 3}}


class TestSettings:
    """Environment and configure()."""

    def test_configure_applies_file_then_overrides(self, tmp_path):
        path = write_config(RunConfig(mem_interval=3, seed=4), tmp_path / "run.cfg")
        settings = configure(path, seed=9)
        assert settings.run.mem_interval == 3
        assert settings.run.seed == 9
        assert get_settings() is settings

    def test_environment_prefix(self, monkeypatch):
        monkeypatch.setenv("QMVOS_LOG_LEVEL", "DEBUG")
        monkeypatch.setenv("QMVOS_RUN__MEM_INTERVAL", "7")
        settings = configure()
        assert settings.log_level == "DEBUG"
        assert settings.run.mem_interval == 7

    def test_file_overrides_environment(self, monkeypatch, tmp_path):
        monkeypatch.setenv("QMVOS_RUN__MEM_INTERVAL", "7")
        path = tmp_path / "run.cfg"
        path.write_text("mem_interval = 2\n")
        assert configure(path).run.mem_interval == 2

    def test_invalid_environment(self, monkeypatch):
        monkeypatch.setenv("QMVOS_RUN__MEM_INTERVAL", "0")
        with pytest.raises(ConfigurationError, match="mem_interval"):
            configure()
