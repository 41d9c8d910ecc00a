"""Flat key-value config files with dotted section prefixes.

Syntax: one ``key = value`` per line, ``#`` comments, blank lines ignored.
Example::

    seed = 42
    pca.k = 110
    lr.c = 0.5
    ensemble.external = other_model.tsv
"""
from __future__ import annotations

from .errors import ParseError


def parse_config(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ParseError(f"expected 'key = value', got {stripped!r}", line=lineno)
        key, _, value = stripped.partition("=")
        key = key.strip()
        if not key:
            raise ParseError("empty key", line=lineno)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", line=lineno)
        values[key] = value.strip()
    return values


class Config:
    def __init__(self, values: dict[str, str]):
        self.values = values

    @classmethod
    def from_text(cls, text: str) -> "Config":
        return cls(parse_config(text))

    def get(self, key: str, default=None) -> str | None:
        return self.values.get(key, default)

    def require(self, key: str) -> str:
        if key not in self.values:
            raise ParseError(f"missing required config key {key!r}")
        return self.values[key]

    def get_int(self, key: str, default: int) -> int:
        raw = self.values.get(key)
        return default if raw is None else int(raw)

    def get_float(self, key: str, default: float) -> float:
        raw = self.values.get(key)
        return default if raw is None else float(raw)

    def get_bool(self, key: str, default: bool) -> bool:
        raw = self.values.get(key)
        if raw is None:
            return default
        if raw.lower() in ("true", "yes", "1"):
            return True
        if raw.lower() in ("false", "no", "0"):
            return False
        raise ParseError(f"config key {key!r}: expected a boolean, got {raw!r}")

    def get_list(self, key: str) -> list[str]:
        raw = self.values.get(key, "")
        return [part.strip() for part in raw.split(",") if part.strip()]
