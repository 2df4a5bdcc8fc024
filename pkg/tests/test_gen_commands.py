"""Tests for the gen subcommands."""

import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from hcstream.cli import app
from hcstream.graph import format_graph, load_graph
from hcstream.instances import clique, disjoint_union, path_vertices

runner = CliRunner()


@pytest.fixture(autouse=True)
def isolated_config(mock_config_dir: dict, clean_env):
    yield


class TestClassicCommands:
    """Tests for path, cycle, clique and union."""

    def test_clique(self, tmp_path: Path):
        """Test that the written file is the canonical clique."""
        out = tmp_path / "k4.txt"

        result = runner.invoke(app, ["gen", "clique", "--n", "4", str(out)])

        assert result.exit_code == 0
        assert out.read_text() == format_graph(clique(4))
        assert json.loads(result.output) == {"family": "clique", "n": 4, "m": 6, "output": str(out)}

    def test_weighted_cycle(self, tmp_path: Path):
        """Test that --weight reaches every edge."""
        out = tmp_path / "c5.txt"

        runner.invoke(app, ["gen", "cycle", "-n", "5", str(out), "--weight", "2"])

        assert {w for _, _, w in load_graph(out).edges} == {2.0}

    def test_union(self, tmp_path: Path):
        """Test a union of a triangle and a path."""
        out = tmp_path / "u.txt"

        result = runner.invoke(app, ["gen", "union", "-p", "clique:3", "-p", "path:2", str(out)])

        assert result.exit_code == 0
        assert load_graph(out).edges == disjoint_union(clique(3), path_vertices(2)).edges

    def test_union_bad_part(self, tmp_path: Path):
        """Test that a part without a size exits 2."""
        result = runner.invoke(app, ["gen", "union", "-p", "clique", str(tmp_path / "u.txt")])

        assert result.exit_code == 2

    def test_union_unknown_family(self, tmp_path: Path):
        """Test that an unknown part family exits 2."""
        result = runner.invoke(app, ["gen", "union", "-p", "star:4", str(tmp_path / "u.txt")])

        assert result.exit_code == 2


class TestHiddenStructure:
    """Tests for generators with ground truth."""

    def test_noc_hidden(self, tmp_path: Path):
        """Test that --hidden records the effective n and the cycles."""
        out, hidden = tmp_path / "noc.txt", tmp_path / "noc.json"

        result = runner.invoke(
            app, ["gen", "noc", "--n", "256", "--k", "4", "--case", "1", str(out), "--hidden", str(hidden)]
        )

        assert result.exit_code == 0
        assert json.loads(hidden.read_text()) == {"case": 1, "n": 256, "cycles": 2, "cycle_length": 32}
        assert load_graph(out).m == 208

    def test_ovme_seeded(self, tmp_path: Path):
        """Test that the seed fixes the instance."""
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        for out in (a, b):
            runner.invoke(
                app, ["gen", "ovme", "-n", "64", "-k", "3", "-t", "4", "-c", "no", str(out), "--seed", "7"]
            )

        assert a.read_text() == b.read_text()

    def test_ovme_bad_case(self, tmp_path: Path):
        """Test that an unknown case exits 2."""
        result = runner.invoke(app, ["gen", "ovme", "-n", "64", "-k", "3", "-t", "4", "-c", "maybe", str(tmp_path / "o.txt")])

        assert result.exit_code == 2

    def test_two_clique_hidden(self, tmp_path: Path):
        """Test that the two-clique bipartition is written."""
        hidden = tmp_path / "h.json"

        runner.invoke(app, ["gen", "two-clique", "-s", "3", "--cross", "2", str(tmp_path / "g.txt"), "-H", str(hidden)])

        assert json.loads(hidden.read_text())["bipartition"] == [[0, 1, 2], [3, 4, 5]]

    def test_index_with_bits(self, tmp_path: Path):
        """Test that a bit matrix file drives the index gadget."""
        bits = tmp_path / "bits.json"
        bits.write_text("[[1, 1], [1, 1]]")
        hidden = tmp_path / "h.json"

        result = runner.invoke(
            app, ["gen", "index", "--N", "2", str(tmp_path / "g.txt"), "--bits", str(bits), "--hidden", str(hidden)]
        )

        assert result.exit_code == 0
        assert json.loads(hidden.read_text())["cost_if_present"] == 776.0

    def test_index_unreadable_bits(self, tmp_path: Path):
        """Test that a malformed bit matrix exits 2."""
        bits = tmp_path / "bits.json"
        bits.write_text("[[1, 1]")

        result = runner.invoke(app, ["gen", "index", "--N", "2", str(tmp_path / "g.txt"), "--bits", str(bits)])

        assert result.exit_code == 2
