"""Tests for configuration loading and validation."""

from pathlib import Path

import pytest

from src.config import ExperimentConfig, build_config, load_config_file
from src.errors import ConfigError


class TestExperimentConfig:
    def test_defaults(self):
        config = ExperimentConfig()
        assert config.orders == [2, 4, 6]
        assert config.cfl_fraction == 0.5
        assert config.output_dir == Path("results")
        assert config.workers == 1

    @pytest.mark.parametrize("field,value", [
        ("orders", [3]),
        ("methods", ["penalty"]),
        ("conditions", ["pinned"]),
        ("m_list", [41, 21]),
        ("cfl_fraction", 1.5),
        ("t_final", 0.0),
        ("alpha_grid", [0.1, -0.2]),
        ("workers", 0),
    ])
    def test_rejects(self, field, value):
        with pytest.raises(ValueError):
            ExperimentConfig(**{field: value})

    def test_hybrid_needs_ring(self):
        with pytest.raises(ValueError):
            ExperimentConfig(methods=["hybrid"], conditions=["clamped"])
        ExperimentConfig(methods=["hybrid"], conditions=["ring"])

    def test_alpha_grid_sorted(self):
        assert ExperimentConfig(alpha_grid=[0.5, 0.1]).alpha_grid == [0.1, 0.5]


class TestConfigFile:
    def test_parse(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# convergence study\nkind = convergence\norders = 2, 4\nm-list = 21,41  # coarse\n"
                        "t_final = 0.5\n")
        values = load_config_file(path)
        assert values == {"kind": "convergence", "orders": ["2", "4"], "m_list": ["21", "41"], "t_final": "0.5"}
        config = build_config(values, {})
        assert config.orders == [2, 4]
        assert config.m_list == [21, 41]
        assert config.t_final == 0.5

    def test_flags_override_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("t_final = 0.5\ncfl_fraction = 0.25\n")
        config = build_config(load_config_file(path), {"t_final": 2.0, "cfl_fraction": None})
        assert config.t_final == 2.0
        assert config.cfl_fraction == 0.25

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("resolution = 12\n")
        with pytest.raises(ConfigError):
            load_config_file(path)

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("orders 2\n")
        with pytest.raises(ConfigError):
            load_config_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config_file(tmp_path / "absent.cfg")

    def test_invalid_values_become_config_errors(self):
        with pytest.raises(ConfigError):
            build_config({"orders": ["5"]}, {})
