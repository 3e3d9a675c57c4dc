"""Delimiter-separated output tables with versioned headers.

Every table starts with ``# timefuse <name> <version>`` followed by a
tab-separated column header.  Floats are written with shortest-roundtrip
repr so identical runs produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Mapping


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def table_text(name: str, columns: list[str], rows: Iterable[Iterable], version: str = "v1") -> str:
    lines = [f"# timefuse {name} {version}", "\t".join(columns)]
    for row in rows:
        lines.append("\t".join(format_value(v) for v in row))
    return "\n".join(lines) + "\n"


def write_table(
    directory: Path, name: str, columns: list[str], rows: Iterable[Iterable], version: str = "v1"
) -> Path:
    path = directory / f"{name}.tsv"
    path.write_text(table_text(name, columns, rows, version))
    return path


def summary_text(name: str, entries: Mapping[str, object], version: str = "v1") -> str:
    lines = [f"# timefuse {name} {version}"]
    for key, value in entries.items():
        lines.append(f"{key}={format_value(value)}")
    return "\n".join(lines) + "\n"


def write_summary(directory: Path, name: str, entries: Mapping[str, object], version: str = "v1") -> Path:
    path = directory / f"{name}.txt"
    path.write_text(summary_text(name, entries, version))
    return path
