"""Tests for configuration management."""

from __future__ import annotations

from pathlib import Path

import pytest
import yaml

from irs_secrecy_lab.config import (
    ConfigError,
    RunConfig,
    TrainConfig,
    dataclass_from_dict,
    generate_sample_config,
    load_config,
    save_config,
)


class TestConfigLoading:
    """Tests for config file loading."""

    def test_load_default_config(self, tmp_path, monkeypatch):
        """Test loading config when no file exists."""
        monkeypatch.chdir(tmp_path)
        config = load_config(None)

        assert config == RunConfig()
        assert config.train.d3qn_lr == 0.005
        assert config.train.policy_lr == 0.004

    def test_discovers_file_in_working_directory(self, tmp_path, monkeypatch):
        """Test discovers file in working directory."""
        monkeypatch.chdir(tmp_path)
        Path("irs-secrecy-lab.yaml").write_text("seeds: [3, 4]\n")

        assert load_config(None).seeds == (3, 4)

    def test_load_config_from_file(self, tmp_path):
        """Test loading config from YAML file."""
        path = tmp_path / "run.yaml"
        path.write_text(
            """
scenario: tiny
schemes: [proposed, ao]
seeds: [1, 2]
train:
  episodes: 10
  d3qn_hidden: [32, 32]
ao:
  tolerance: 0.001
reward:
  discount: 0.95
"""
        )
        config = load_config(path)

        assert config.scenario == "tiny"
        assert config.schemes == ("proposed", "ao")
        assert config.seeds == (1, 2)
        assert config.train.episodes == 10
        assert config.train.d3qn_hidden == (32, 32)
        assert config.ao.tolerance == 0.001
        assert config.reward.discount == 0.95

    def test_json_document(self, tmp_path):
        """Test JSON document."""
        path = tmp_path / "run.json"
        path.write_text('{"schemes": ["fixed_irs"], "workers": 2}')

        config = load_config(path)

        assert config.schemes == ("fixed_irs",)
        assert config.workers == 2

    def test_env_vars_override_config(self, tmp_path, monkeypatch):
        """Test that environment variables override config file."""
        path = tmp_path / "run.yaml"
        path.write_text("workers: 1\nout_dir: from-file\n")
        monkeypatch.setenv("IRS_LAB_WORKERS", "4")
        monkeypatch.setenv("IRS_LAB_OUT_DIR", "from-env")

        config = load_config(path)

        assert config.workers == 4
        assert config.out_dir == "from-env"

    def test_invalid_worker_env(self, tmp_path, monkeypatch):
        """Test invalid worker env."""
        monkeypatch.chdir(tmp_path)
        monkeypatch.setenv("IRS_LAB_WORKERS", "many")

        with pytest.raises(ConfigError, match="IRS_LAB_WORKERS"):
            load_config(None)

    def test_missing_file(self, tmp_path):
        """Test missing file."""
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "absent.yaml")


class TestConfigValidation:
    """Tests for rejected documents."""

    def test_malformed_json_reports_position(self, tmp_path):
        """Test malformed JSON reports position."""
        path = tmp_path / "bad.json"
        path.write_text('{\n  "schemes": ["proposed",}\n}')

        with pytest.raises(ConfigError, match=r"line \d+, column \d+"):
            load_config(path)

    def test_invalid_yaml(self, tmp_path):
        """Test invalid YAML."""
        path = tmp_path / "bad.yaml"
        path.write_text("invalid: yaml: content: [")

        with pytest.raises(ConfigError):
            load_config(path)

    def test_unknown_key(self, tmp_path):
        """Test unknown key."""
        path = tmp_path / "run.yaml"
        path.write_text("seedz: [1]\n")

        with pytest.raises(ConfigError, match="Unknown config key: seedz"):
            load_config(path)

    def test_unknown_nested_key(self, tmp_path):
        """Test unknown nested key."""
        path = tmp_path / "run.yaml"
        path.write_text("train:\n  learning_rate: 0.1\n")

        with pytest.raises(ConfigError, match="Unknown config key: train.learning_rate"):
            load_config(path)

    def test_wrong_type(self):
        """Test wrong type."""
        with pytest.raises(ConfigError, match="workers must be an integer"):
            dataclass_from_dict(RunConfig, {"workers": "two"})

    def test_int_accepted_for_float(self):
        """Test int accepted for float."""
        config = dataclass_from_dict(TrainConfig, {"d3qn_lr": 1})
        assert config.d3qn_lr == 1.0
        assert isinstance(config.d3qn_lr, float)

    def test_empty_seed_list(self):
        """Test empty seed list."""
        with pytest.raises(ConfigError, match="at least one seed"):
            RunConfig(seeds=()).validate()

    def test_empty_scheme_list(self):
        """Test empty scheme list."""
        with pytest.raises(ConfigError, match="at least one scheme"):
            RunConfig(schemes=()).validate()

    def test_unknown_scheme(self):
        """Test unknown scheme."""
        with pytest.raises(ConfigError, match="Unknown scheme: h2dt"):
            RunConfig(schemes=("h2dt",)).validate()

    @pytest.mark.parametrize(
        "train",
        [
            {"batch_size": 128, "buffer_capacity": 64},
            {"epsilon_start": 0.01, "epsilon_end": 0.5},
            {"d3qn_lr": 0.0},
            {"sac_hidden": []},
        ],
    )
    def test_invalid_train_settings(self, train):
        """Test invalid train settings."""
        config = RunConfig(train=dataclass_from_dict(TrainConfig, train))
        with pytest.raises(ConfigError):
            config.validate()


class TestConfigEcho:
    """Tests for explicit-default echo."""

    def test_round_trip(self, tmp_path):
        """Test a saved run config loads back unchanged."""
        config = RunConfig(
            scenario="tiny",
            scenario_overrides={"n_elements": 16},
            schemes=("proposed", "random_choice"),
            seeds=(0, 1, 2),
            train=TrainConfig(episodes=7, d3qn_hidden=(8, 8)),
        )
        path = tmp_path / "out" / "run_config.yaml"
        save_config(config, path)

        assert load_config(path) == config

    def test_echo_writes_every_field(self, tmp_path):
        """Test echo writes every field."""
        path = tmp_path / "run_config.yaml"
        save_config(RunConfig(), path)
        data = yaml.safe_load(path.read_text())

        assert set(data) == {f for f in RunConfig.__dataclass_fields__}
        assert set(data["train"]) == set(TrainConfig.__dataclass_fields__)

    def test_sample_config_loads(self, tmp_path):
        """Test sample config loads."""
        path = tmp_path / "irs-secrecy-lab.yaml"
        path.write_text(generate_sample_config())

        config = load_config(path)

        assert config.scenario == "tiny"
        assert "random_choice" in config.schemes
