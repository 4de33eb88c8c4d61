"""Flat ``key = value`` configuration files.

Keys match the long flag names, with dashes or underscores.  Relative
config paths that do not exist in the working directory are looked up in the
directory named by ``BELLQPT_CONFIG_DIR``.
"""

from __future__ import annotations

import os
from pathlib import Path

CONFIG_DIR_ENV = "BELLQPT_CONFIG_DIR"


class ConfigError(ValueError):
    pass


def resolve_config_path(name: str | os.PathLike) -> Path:
    path = Path(name)
    if path.is_absolute() or path.exists():
        return path
    base = os.environ.get(CONFIG_DIR_ENV)
    if base:
        candidate = Path(base) / path
        if candidate.exists():
            return candidate
    return path


def parse_config(text: str, source: str = "<config>") -> dict[str, str]:
    """Raw string values keyed by normalized name; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {raw!r}")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def load_config(name) -> dict[str, str]:
    path = resolve_config_path(name)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(path)!r}: {exc.strerror}") from exc
    return parse_config(text, str(path))
