"""Loading of structured (TOML / YAML / JSON) mapping files."""
from __future__ import annotations

import json
import tomllib
from pathlib import Path
from typing import Any, Final

import yaml


class ConfigError(RuntimeError):
    """Raised when a structured file cannot be loaded."""


_TOML_EXTENSIONS: Final = {".toml"}
_YAML_EXTENSIONS: Final = {".yaml", ".yml"}
_JSON_EXTENSIONS: Final = {".json"}
STRUCTURED_EXTENSIONS: Final = _TOML_EXTENSIONS | _YAML_EXTENSIONS | _JSON_EXTENSIONS


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ConfigError(f"file not found: {path}") from exc
    except UnicodeDecodeError as exc:
        raise ConfigError(f"not UTF-8: {path}: byte {exc.start}") from exc


def parse_config_text(text: str, suffix: str, *, source: str = "<text>") -> dict[str, Any]:
    """Parse ``text`` as the format named by a file ``suffix`` (``.toml``, ``.yaml``, ``.yml``, ``.json``)."""
    suffix = suffix.lower()

    if suffix in _TOML_EXTENSIONS:
        try:
            return tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML: {source}: {exc}") from exc

    if suffix in _JSON_EXTENSIONS:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {source}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("JSON file must hold an object at the top level")
        return data

    if suffix in _YAML_EXTENSIONS:
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML: {source}: {exc}") from exc
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigError("YAML file must define a mapping at the top level")
        return data

    raise ConfigError(f"unsupported extension: {suffix}")


def load_config(path: str | Path) -> dict[str, Any]:
    """Load a mapping from a TOML, YAML or JSON file."""
    config_path = Path(path)
    if config_path.suffix.lower() not in STRUCTURED_EXTENSIONS:
        raise ConfigError(f"unsupported extension: {config_path.suffix}")
    return parse_config_text(_read_text(config_path), config_path.suffix, source=str(config_path))


__all__ = ["STRUCTURED_EXTENSIONS", "ConfigError", "load_config", "parse_config_text"]
