"""Flat key = value run configuration files.

One assignment per line, ``#`` comments, values left as strings until a
typed getter pulls them. CLI flags override file values; the resolved
mapping is echoed as JSON next to every command's outputs so any run can
be reproduced from its artifacts.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterator, Optional

from .errors import ConfigurationError


class ConfigMap:
    """String-to-string settings with typed, error-reporting getters."""

    def __init__(self, values: Optional[dict[str, str]] = None, source: str = ""):
        self.values: dict[str, str] = dict(values or {})
        self.source = source

    @classmethod
    def from_file(cls, path: str | Path) -> "ConfigMap":
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"config file not found: {path}")
        values: dict[str, str] = {}
        for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(
                    f"{path}:{line_no}: expected 'key = value', got {raw!r}"
                )
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
        return cls(values, source=str(path))

    def __contains__(self, key: str) -> bool:
        return key in self.values

    def __iter__(self) -> Iterator[str]:
        return iter(self.values)

    def set(self, key: str, value: object) -> None:
        self.values[key] = str(value)

    def get_str(self, key: str, default: Optional[str] = None) -> str:
        if key in self.values:
            return self.values[key]
        if default is None:
            raise ConfigurationError(f"missing config key {key!r}")
        return default

    def get_int(self, key: str, default: Optional[int] = None) -> int:
        return self._typed(key, default, int, "integer")

    def get_float(self, key: str, default: Optional[float] = None) -> float:
        return self._typed(key, default, float, "number")

    def get_bool(self, key: str, default: Optional[bool] = None) -> bool:
        if key not in self.values:
            if default is None:
                raise ConfigurationError(f"missing config key {key!r}")
            return default
        text = self.values[key].lower()
        if text in ("true", "yes", "1", "on"):
            return True
        if text in ("false", "no", "0", "off"):
            return False
        raise ConfigurationError(f"config key {key!r}: expected a boolean, got {text!r}")

    def get_floats(self, key: str, default: Optional[list[float]] = None) -> list[float]:
        if key not in self.values:
            if default is None:
                raise ConfigurationError(f"missing config key {key!r}")
            return default
        return [
            self._convert(key, token, float, "number")
            for token in self.values[key].replace(",", " ").split()
        ]

    def _typed(self, key, default, cast, label):
        if key not in self.values:
            if default is None:
                raise ConfigurationError(f"missing config key {key!r}")
            return default
        return self._convert(key, self.values[key], cast, label)

    def _convert(self, key, text, cast, label):
        try:
            return cast(text)
        except ValueError as exc:
            raise ConfigurationError(
                f"config key {key!r}: expected a {label}, got {text!r}"
            ) from exc

    def grid_axes(self, prefix: str = "grid.") -> dict[str, list[str]]:
        """All ``grid.<name>`` keys as name -> list of value tokens."""
        axes: dict[str, list[str]] = {}
        for key in sorted(self.values):
            if key.startswith(prefix):
                tokens = self.values[key].replace(",", " ").split()
                if not tokens:
                    raise ConfigurationError(f"config key {key!r}: empty grid axis")
                axes[key[len(prefix):]] = tokens
        return axes

    def echo(self) -> dict[str, str]:
        return dict(self.values)

    def write_echo(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps({"source": self.source, "values": self.echo()}, indent=1),
            encoding="utf-8",
        )
