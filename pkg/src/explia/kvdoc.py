"""Flat ``key = value`` text documents.

One line per entry, ``#`` starts a comment, keys may be dotted for
grouping. Insertion order is preserved on write so documents diff cleanly
in golden tests; values are written with ``repr``-exact floats so reads
round-trip bit-for-bit. Used for configs, sidecar metadata, reports and
manifests.
"""

from __future__ import annotations

from .errors import ConfigError


def format_value(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))  # plain-float repr even for numpy scalars
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(v) for v in value)
    return str(value)


def dumps(entries: dict[str, object]) -> str:
    lines = [f"{key} = {format_value(value)}" for key, value in entries.items()]
    return "\n".join(lines) + ("\n" if lines else "")


def dump(entries: dict[str, object], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(entries))


def loads(text: str) -> dict[str, str]:
    """Parse into an ordered key -> raw string mapping.

    Raises ConfigError on lines that are not ``key = value``, and on
    duplicate keys (a silent last-wins would hide config typos).
    """
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value.strip()
    return entries


def load(path) -> dict[str, str]:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())
