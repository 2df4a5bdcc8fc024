"""Configuration commands for the hc CLI."""

from __future__ import annotations

from typing import Annotated

import typer

from hcstream.config import get_config_path, get_settings, reset_config, set_setting
from hcstream.errors import HCError
from hcstream.output import abort, console, emit_json, print_success

config_app = typer.Typer(
    name="config",
    help="View or change run defaults",
    no_args_is_help=True,
)


@config_app.command("show")
def show_config() -> None:
    """Print the effective defaults as JSON."""
    try:
        settings = get_settings()
    except HCError as e:
        abort(e)
    emit_json({"config_file": str(get_config_path()), "defaults": settings.to_dict()})


@config_app.command("set")
def set_config(
    key: Annotated[str, typer.Argument(help="Setting name, e.g. epsilon")],
    value: Annotated[str, typer.Argument(help="New value")],
) -> None:
    """Persist one default in the config file."""
    try:
        stored = set_setting(key, value)
    except HCError as e:
        abort(e)
    print_success(f"{key} = {stored} saved to {get_config_path()}")


@config_app.command("reset")
def reset() -> None:
    """Remove the config file."""
    if reset_config():
        print_success("Configuration reset.")
    else:
        console.print("No configuration file was present.")
