"""Versioned prompt catalog.

Prompt texts live in a structured YAML file shipped with the package
(``data/prompts.yaml``) and can be overridden via configuration. Each
entry has a ``system`` and a ``user`` template; user templates are
``str.format`` strings.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import yaml

from .errors import ConfigError


class PromptCatalog:
    def __init__(self, raw: dict):
        if not isinstance(raw, dict) or "prompts" not in raw:
            raise ConfigError("prompt catalog must contain a 'prompts' mapping")
        self.version = raw.get("version", 0)
        self._prompts: dict[str, dict[str, str]] = {}
        for key, entry in raw["prompts"].items():
            if not isinstance(entry, dict) or "user" not in entry:
                raise ConfigError(f"prompt {key!r} must define a 'user' template")
            self._prompts[key] = {
                "system": str(entry.get("system", "")),
                "user": str(entry["user"]),
            }

    @classmethod
    def load_default(cls) -> "PromptCatalog":
        text = (
            resources.files("ragengine").joinpath("data/prompts.yaml").read_text("utf-8")
        )
        return cls(yaml.safe_load(text))

    @classmethod
    def load(cls, path: str | Path) -> "PromptCatalog":
        try:
            raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot load prompt catalog {path}: {exc}") from exc
        return cls(raw)

    def keys(self) -> list[str]:
        return sorted(self._prompts)

    def render(self, key: str, **fields: str) -> tuple[str, str]:
        """Return (system, user) with the user template filled in."""
        entry = self._prompts.get(key)
        if entry is None:
            raise ConfigError(f"unknown prompt key {key!r}")
        try:
            user = entry["user"].format(**fields)
        except (KeyError, IndexError) as exc:
            raise ConfigError(f"prompt {key!r} missing field: {exc}") from exc
        return entry["system"], user
