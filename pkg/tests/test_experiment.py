"""Tests for experiment configs and runs."""

import csv
from pathlib import Path

import pytest

from hcstream.errors import InvalidArgumentError, ParseError
from hcstream.experiment import (
    COLUMNS,
    ExperimentConfig,
    Pipeline,
    expand_jobs,
    load_experiment,
    run_experiment,
)
from hcstream.instances import Family
from hcstream.stream import ArrivalOrder


def _read_rows(path: Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


class TestExperimentConfig:
    """Tests for ExperimentConfig parsing."""

    def test_from_dict(self, tmp_path: Path):
        """Test defaults and relative output paths."""
        config = ExperimentConfig.from_dict(
            {"name": "demo", "instances": [{"family": "clique", "size": 4}], "order": "shuffled", "target": 50},
            base_dir=tmp_path,
        )

        assert config.pipeline is Pipeline.STREAMING
        assert config.order is ArrivalOrder.SHUFFLED
        assert config.output == tmp_path / "demo.csv"
        assert config.target == 50
        assert config.seeds == [0]
        assert config.instances[0].family is Family.CLIQUE
        assert config.to_dict()["target"] == 50

    def test_missing_name(self):
        """Test that a name is required."""
        with pytest.raises(InvalidArgumentError, match="'name'"):
            ExperimentConfig.from_dict({"instances": []})

    def test_unknown_key(self):
        """Test that unknown keys are rejected by name."""
        with pytest.raises(InvalidArgumentError, match="colour"):
            ExperimentConfig.from_dict({"name": "demo", "colour": "red"})

    def test_invalid_pipeline(self):
        """Test that an unknown pipeline is rejected."""
        with pytest.raises(InvalidArgumentError):
            ExperimentConfig.from_dict({"name": "demo", "pipeline": "batch"})

    def test_load_missing_file(self, tmp_path: Path):
        """Test that a missing config is a parse error."""
        with pytest.raises(ParseError, match="not found"):
            load_experiment(tmp_path / "missing.toml")

    def test_load_bad_toml(self, tmp_path: Path):
        """Test that invalid TOML is a parse error."""
        path = tmp_path / "bad.toml"
        path.write_text("name = \n")

        with pytest.raises(ParseError, match="invalid TOML"):
            load_experiment(path)

    def test_load(self, tmp_path: Path):
        """Test loading a TOML config with a table array of instances."""
        path = tmp_path / "exp.toml"
        path.write_text(
            'name = "noc"\npipeline = "offline"\nseeds = [1, 2]\n\n'
            '[[instances]]\nfamily = "noc"\nn = 256\nk = 4\ncase = 1\n'
        )

        config = load_experiment(path)

        assert config.pipeline is Pipeline.OFFLINE
        assert config.output == tmp_path / "noc.csv"
        assert [job.spec.seed for job in expand_jobs(config)] == [1, 2]


class TestRunExperiment:
    """Tests for run_experiment."""

    def test_empty_instance_list(self, tmp_path: Path):
        """Test that no instances still writes the header."""
        config = ExperimentConfig(name="empty", output=tmp_path / "empty.csv")

        assert run_experiment(config) == []
        assert (tmp_path / "empty.csv").read_text() == ",".join(COLUMNS) + "\n"

    def test_offline_row(self, tmp_path: Path):
        """Test one offline K4 row."""
        config = ExperimentConfig.from_dict(
            {
                "name": "k4",
                "pipeline": "offline",
                "finder": "exact",
                "instances": [{"family": "clique", "size": 4}],
            },
            base_dir=tmp_path,
        )

        rows = run_experiment(config)

        assert rows[0]["instance_id"] == "k4-0000"
        assert rows[0]["cost"] == "20.0"
        assert rows[0]["status"] == "ok"
        assert rows[0]["wall_time"] == ""
        assert _read_rows(tmp_path / "k4.csv") == rows

    def test_error_row(self, tmp_path: Path):
        """Test that a failing instance records its error instead of raising."""
        config = ExperimentConfig.from_dict(
            {"name": "bad", "instances": [{"family": "clique"}, {"family": "clique", "size": 3}]},
            base_dir=tmp_path,
        )

        rows = run_experiment(config)

        assert rows[0]["status"].startswith("error:")
        assert "size" in rows[0]["status"]
        assert rows[1]["status"] == "ok"

    def test_bad_parameter_does_not_stop_batch(self, tmp_path: Path):
        """Test that an unconvertible parameter becomes an error row."""
        config = ExperimentConfig.from_dict(
            {
                "name": "weights",
                "instances": [
                    {"family": "path", "size": 4, "weight": "heavy"},
                    {"family": "path", "size": 4},
                ],
            },
            base_dir=tmp_path,
        )

        rows = run_experiment(config)

        assert rows[0]["status"].startswith("error:")
        assert "weight" in rows[0]["status"]
        assert rows[1]["status"] == "ok"
        assert len(_read_rows(tmp_path / "weights.csv")) == 2

    def test_reruns_are_identical(self, tmp_path: Path):
        """Test that the CSV is byte-identical across runs without timing."""
        config = ExperimentConfig.from_dict(
            {
                "name": "again",
                "seeds": [0, 1],
                "order": "shuffled",
                "target": 40,
                "budget_c": 0.001,
                "instances": [{"family": "random", "n": 30, "p": 0.4}],
            },
            base_dir=tmp_path,
        )

        run_experiment(config)
        first = config.output.read_bytes()
        run_experiment(config)

        assert config.output.read_bytes() == first

    def test_gap_ratio_on_high_case(self, tmp_path: Path):
        """Test that the NOC pair gets a gap ratio on its case-1 row."""
        config = ExperimentConfig.from_dict(
            {
                "name": "noc",
                "pipeline": "offline",
                "instances": [
                    {"family": "noc", "n": 256, "k": 4, "case": 1},
                    {"family": "noc", "n": 256, "k": 4, "case": 2},
                ],
            },
            base_dir=tmp_path,
        )

        high, low = run_experiment(config)

        assert float(high["gap_ratio"]) == pytest.approx(float(high["cost"]) / float(low["cost"]))
        assert low["gap_ratio"] == ""

    def test_progress_callback(self, tmp_path: Path):
        """Test that the row callback sees every row."""
        seen = []
        config = ExperimentConfig.from_dict(
            {"name": "cb", "seeds": [0, 1, 2], "instances": [{"family": "path", "size": 5}]},
            base_dir=tmp_path,
        )

        run_experiment(config, on_row=lambda done, total: seen.append((done, total)))

        assert seen == [(1, 3), (2, 3), (3, 3)]

    def test_workers_do_not_change_rows(self, tmp_path: Path):
        """Test that a process pool yields the same rows in the same order."""
        data = {
            "name": "pool",
            "seeds": [0, 1, 2],
            "instances": [{"family": "random", "n": 20, "p": 0.3}, {"family": "cycle", "size": 9}],
        }
        serial = run_experiment(ExperimentConfig.from_dict(data, base_dir=tmp_path / "serial"))
        pooled = run_experiment(ExperimentConfig.from_dict(data, base_dir=tmp_path / "pooled"), workers=2)

        assert pooled == serial

    def test_workers_must_be_positive(self, tmp_path: Path):
        """Test that zero workers is rejected."""
        with pytest.raises(InvalidArgumentError):
            run_experiment(ExperimentConfig(name="x", output=tmp_path / "x.csv"), workers=0)
