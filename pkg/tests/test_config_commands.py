"""Tests for the config subcommands."""

import json

from typer.testing import CliRunner

from hcstream.cli import app
from hcstream.config import load_config

runner = CliRunner()


class TestConfigCommands:
    """Tests for config show, set and reset."""

    def test_show_defaults(self, mock_config_dir: dict, clean_env):
        """Test that show prints the file path and the effective defaults."""
        result = runner.invoke(app, ["config", "show"])

        assert result.exit_code == 0
        data = json.loads(result.output)
        assert data["config_file"] == str(mock_config_dir["file"])
        assert data["defaults"]["finder"] == "spectral"

    def test_set_then_show(self, mock_config_dir: dict, clean_env):
        """Test that a stored value shows up."""
        result = runner.invoke(app, ["config", "set", "epsilon", "0.1"])

        assert result.exit_code == 0
        assert load_config() == {"defaults": {"epsilon": 0.1}}
        shown = runner.invoke(app, ["config", "show"])
        assert json.loads(shown.output)["defaults"]["epsilon"] == 0.1

    def test_set_unknown_key(self, mock_config_dir: dict, clean_env):
        """Test that an unknown key exits 2."""
        result = runner.invoke(app, ["config", "set", "colour", "red"])

        assert result.exit_code == 2
        assert "Known settings" in result.output

    def test_show_bad_env_seed(self, mock_config_dir: dict, clean_env, monkeypatch):
        """Test that an invalid HC_SEED exits 2."""
        monkeypatch.setenv("HC_SEED", "x")

        result = runner.invoke(app, ["config", "show"])

        assert result.exit_code == 2

    def test_reset(self, mock_config_dir: dict, clean_env):
        """Test reset with and without a file."""
        runner.invoke(app, ["config", "set", "seed", "3"])

        first = runner.invoke(app, ["config", "reset"])
        second = runner.invoke(app, ["config", "reset"])

        assert first.exit_code == 0
        assert "reset" in first.output
        assert "No configuration file" in second.output
        assert not mock_config_dir["file"].exists()
