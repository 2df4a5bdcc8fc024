"""Terminal output for the hc CLI using rich.

Human-facing text goes to stderr; reports that other programs read (JSON,
decimal costs) go to stdout unstyled.
"""

from __future__ import annotations

import json
import logging
from typing import TYPE_CHECKING, Any, NoReturn

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table
from rich.text import Text

from hcstream.errors import HCError, exit_code

if TYPE_CHECKING:
    from hcstream.suites import SuiteResult


console = Console(stderr=True)


def configure_logging(verbose: bool = False) -> None:
    """Route library logging through rich on stderr."""
    handler = RichHandler(console=console, show_path=False, show_time=False)
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[handler],
        force=True,
    )


def print_error(message: str) -> None:
    """Print an error message."""
    console.print(f"[bold red]Error:[/bold red] {message}")


def print_success(message: str) -> None:
    """Print a success message."""
    console.print(f"[bold green]{message}[/bold green]")


def print_warning(message: str) -> None:
    """Print a warning message."""
    console.print(f"[yellow]{message}[/yellow]")


def emit_json(data: Any) -> None:
    """Machine-readable report on stdout, stable key order."""
    typer.echo(json.dumps(data, indent=2, sort_keys=True))


def emit_value(value: float) -> None:
    typer.echo(repr(float(value)))


# =============================================================================
# Verification Output
# =============================================================================


def print_suite_table(results: list[SuiteResult]) -> None:
    """Summary table of suite outcomes."""
    table = Table(show_header=True, header_style="bold")
    table.add_column("Suite", style="cyan", min_width=14)
    table.add_column("Checks", justify="right", min_width=6)
    table.add_column("Failed", justify="right", min_width=6)
    table.add_column("Status", min_width=6)

    for result in results:
        failed = result.failed
        failed_text = Text(str(failed), style="red") if failed else Text("-", style="dim")
        if result.passed:
            status = Text("Pass", style="green")
        else:
            status = Text("Fail", style="bold red")
        table.add_row(result.name, str(result.checks), failed_text, status)

    console.print(table)
    for result in results:
        if not result.passed:
            console.print(f"[bold]{result.name}[/bold] failures:")
            for label in (result.failures + result.sampling_failures)[:10]:
                console.print(f"  [red]- {label}[/red]")


# =============================================================================
# Progress
# =============================================================================


def create_experiment_progress_callback(name: str) -> Any:
    """Progress bar advanced once per finished experiment row.

    Returns:
        Callback taking (done, total), with a ``stop`` attribute.
    """
    from rich.progress import BarColumn, Progress, SpinnerColumn, TaskID, TextColumn

    progress = Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(bar_width=30),
        TextColumn("{task.completed}/{task.total}"),
        console=console,
        transient=True,
    )

    task_id: TaskID | None = None
    started = False

    def callback(done: int, total: int) -> None:
        nonlocal task_id, started
        if not started:
            progress.start()
            task_id = progress.add_task(f"Running {name}...", total=total or 1)
            started = True
        if task_id is not None:
            progress.update(task_id, completed=done, total=total)

    callback.progress = progress  # type: ignore[attr-defined]
    callback.stop = lambda: progress.stop() if started else None  # type: ignore[attr-defined]

    return callback


def abort(error: HCError) -> NoReturn:
    """Print an hcstream error and exit with its code."""
    print_error(error.message)
    raise typer.Exit(exit_code(error))
