"""Tests for the output module."""

import json
from io import StringIO
from unittest.mock import patch

import pytest
import typer
from rich.console import Console

from hcstream import output
from hcstream.errors import ParseError, SolverError
from hcstream.suites import SuiteResult


@pytest.fixture
def captured_console():
    """Swap the stderr console for one writing into a buffer."""
    buffer = StringIO()
    with patch("hcstream.output.console", Console(file=buffer, width=100, color_system=None)):
        yield buffer


class TestEmit:
    """Tests for stdout reports."""

    def test_emit_json_sorted(self, capsys):
        """Test that JSON goes to stdout with sorted keys."""
        output.emit_json({"b": 1, "a": [1, 2]})

        captured = capsys.readouterr()
        assert json.loads(captured.out) == {"a": [1, 2], "b": 1}
        assert captured.out.index('"a"') < captured.out.index('"b"')
        assert captured.err == ""

    def test_emit_value_is_exact(self, capsys):
        """Test that costs print as round-trippable decimals."""
        output.emit_value(0.1 + 0.2)

        assert capsys.readouterr().out == "0.30000000000000004\n"

    def test_emit_value_integer_cost(self, capsys):
        """Test that integral costs keep a decimal point."""
        output.emit_value(20)

        assert capsys.readouterr().out == "20.0\n"


class TestAbort:
    """Tests for abort."""

    def test_usage_error_exit_code(self, captured_console: StringIO):
        """Test that input errors exit with 2 and print the message."""
        with pytest.raises(typer.Exit) as exc_info:
            output.abort(ParseError("bad header", 1))

        assert exc_info.value.exit_code == 2
        assert "bad header" in captured_console.getvalue()

    def test_runtime_error_exit_code(self, captured_console: StringIO):
        """Test that runtime failures exit with 1."""
        with pytest.raises(typer.Exit) as exc_info:
            output.abort(SolverError("no cut", size=3))

        assert exc_info.value.exit_code == 1


class TestMessages:
    """Tests for the stderr message helpers."""

    def test_messages(self, captured_console: StringIO):
        """Test that each helper writes its text."""
        output.print_error("broken")
        output.print_success("done")
        output.print_warning("careful")

        text = captured_console.getvalue()
        assert "Error: broken" in text
        assert "done" in text
        assert "careful" in text


class TestSuiteTable:
    """Tests for print_suite_table."""

    def test_lists_suites_and_failures(self, captured_console: StringIO):
        """Test that the table names every suite and the failing labels."""
        good = SuiteResult("oracle", checks=5)
        bad = SuiteResult("sandwich", checks=3, failures=["trial 2"], sampling_failures=["forced sampling 7", "forced sampling 9"], allowed_failures=1)

        output.print_suite_table([good, bad])

        text = captured_console.getvalue()
        assert "oracle" in text
        assert "Pass" in text
        assert "Fail" in text
        assert "trial 2" in text
        assert "forced sampling 9" in text


class TestProgress:
    """Tests for the experiment progress callback."""

    def test_callback_and_stop(self, captured_console: StringIO):
        """Test that the callback tracks rows and stops cleanly."""
        callback = output.create_experiment_progress_callback("demo")
        callback(1, 2)
        callback(2, 2)
        callback.stop()

        task = callback.progress.tasks[0]
        assert task.completed == 2
        assert task.total == 2

    def test_stop_before_start(self):
        """Test that stopping an unused callback is harmless."""
        callback = output.create_experiment_progress_callback("idle")

        assert callback.stop() is None
