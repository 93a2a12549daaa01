"""CSV and report files with a provenance header.

Every file starts with ``#``-prefixed lines holding the tool version and the
config digest; nothing time- or host-dependent is written, so identical runs
give identical bytes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from fracinv import __version__
from fracinv.forward import ObservationSeries, SolutionField


def header_lines(digest: str, kind: str, extra: Mapping[str, Any] | None = None) -> list[str]:
    lines = [f"# fracinv {__version__}", f"# config-sha256 {digest}", f"# kind {kind}"]
    for key, value in (extra or {}).items():
        lines.append(f"# {key} {value}")
    return lines


def _fmt(x: float) -> str:
    return repr(float(x))


def write_table(
    path: Path,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    header: list[str],
) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    out = list(header)
    out.append(",".join(columns))
    for row in rows:
        out.append(",".join(_fmt(v) if isinstance(v, (float, np.floating)) else str(v) for v in row))
    path.write_text("\n".join(out) + "\n")
    return path


def write_observation(path: Path, t: np.ndarray, h: np.ndarray, header: list[str]) -> Path:
    return write_table(path, ("t", "h"), zip(t, h), header)


def write_solution(path: Path, field: SolutionField, header: list[str]) -> Path:
    x = np.repeat(field.x, field.grid.t.size)
    t = np.tile(field.grid.t, field.x.size)
    return write_table(path, ("x", "t", "u"), zip(x, t, field.values.ravel()), header)


def read_header(path: Path) -> dict[str, str]:
    meta = {}
    with open(path) as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition(" ")
            meta[key] = value
    return meta


def read_table(path: Path) -> tuple[list[str], np.ndarray]:
    with open(path) as f:
        lines = [ln for ln in f if not ln.startswith("#") and ln.strip()]
    if not lines:
        raise ValueError(f"{path} has no data")
    columns = lines[0].strip().split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]], dtype=np.float64)
    return columns, data.reshape(-1, len(columns))


def read_observation(path: Path, x0: float) -> tuple[float | None, ObservationSeries]:
    """Returns the ``t = 0`` value (if present) and the series on ``t > 0``."""
    columns, data = read_table(path)
    if columns != ["t", "h"]:
        raise ValueError(f"{path}: expected columns t,h, got {','.join(columns)}")
    t, h = data[:, 0], data[:, 1]
    h0 = float(h[0]) if t[0] == 0.0 else None
    keep = t > 0.0
    return h0, ObservationSeries(x0, t[keep], h[keep])


def write_report(path: Path, entries: Mapping[str, Any], header: list[str]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = list(header)
    for key, value in entries.items():
        lines.append(f"{key}: {_format_value(value)}")
    path.write_text("\n".join(lines) + "\n")
    return path


def _format_value(value: Any) -> str:
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    if isinstance(value, (float, np.floating)):
        return _fmt(value)
    return str(value)


def read_report(path: Path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        if line.startswith("#") or ":" not in line:
            continue
        key, _, value = line.partition(":")
        out[key.strip()] = value.strip()
    return out
