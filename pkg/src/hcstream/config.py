"""Configuration management for hcstream.

Stores run defaults in ~/.hcstream/config.toml.
Supports the HC_SEED environment variable as the default seed.
"""

from __future__ import annotations

import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib  # type: ignore[import-not-found]

import tomli_w

from hcstream.errors import InvalidArgumentError

CONFIG_DIR = Path.home() / ".hcstream"
CONFIG_FILE = CONFIG_DIR / "config.toml"

SEED_ENV_VAR = "HC_SEED"


def ensure_config_dir() -> None:
    """Create config directory if it doesn't exist."""
    if not CONFIG_DIR.exists():
        CONFIG_DIR.mkdir(mode=0o700, parents=True)


def load_config() -> dict[str, Any]:
    """Load configuration from config file."""
    if not CONFIG_FILE.exists():
        return {}
    try:
        with CONFIG_FILE.open("rb") as f:
            return tomllib.load(f)
    except Exception:
        return {}


def save_config(config: dict[str, Any]) -> None:
    """Save configuration to config file."""
    ensure_config_dir()
    with CONFIG_FILE.open("wb") as f:
        tomli_w.dump(config, f)


def get_config_path() -> Path:
    """Get the path to the config file."""
    return CONFIG_FILE


# =============================================================================
# Run defaults
# =============================================================================


@dataclass
class Settings:
    """Effective defaults for solver, sparsifier and oracle runs."""

    seed: int = 0
    epsilon: float = 0.2
    beta: float = 1 / 3
    budget_c: float = 6.0
    oracle_cap: int = 16
    exact_cap: int = 20
    finder: str = "spectral"

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


SETTING_KEYS = tuple(f.name for f in fields(Settings))


def _coerce(key: str, value: Any) -> Any:
    """Convert a raw value to the type of the named setting."""
    default = getattr(Settings(), key)
    try:
        if isinstance(default, bool):
            return str(value).lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
    except (TypeError, ValueError) as e:
        raise InvalidArgumentError(f"Invalid value for {key}: {value!r}") from e
    return str(value)


def get_env_seed() -> int | None:
    """Get the default seed from HC_SEED, if set."""
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError as e:
        raise InvalidArgumentError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from e


def get_settings() -> Settings:
    """Merge built-in defaults, the config file and the environment.

    The HC_SEED environment variable takes precedence over the file.
    """
    settings = Settings()
    defaults = load_config().get("defaults", {})
    for key, value in defaults.items():
        if key in SETTING_KEYS:
            setattr(settings, key, _coerce(key, value))

    env_seed = get_env_seed()
    if env_seed is not None:
        settings.seed = env_seed
    return settings


def set_setting(key: str, value: str) -> Any:
    """Persist one default in the config file. Returns the stored value."""
    if key not in SETTING_KEYS:
        raise InvalidArgumentError(
            f"Unknown setting '{key}'. Known settings: {', '.join(SETTING_KEYS)}"
        )
    coerced = _coerce(key, value)
    config = load_config()
    config.setdefault("defaults", {})[key] = coerced
    save_config(config)
    return coerced


def reset_config() -> bool:
    """Remove the config file. Returns True if a file was removed."""
    if CONFIG_FILE.exists():
        CONFIG_FILE.unlink()
        return True
    return False
