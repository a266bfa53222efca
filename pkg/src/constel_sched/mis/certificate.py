"""Solution certificates: ``s <cardinality>`` then one 1-based vertex id per line."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

from ..graph import GraphFormatError


def write_certificate(vertices: Iterable[int], path) -> None:
    vs = sorted(int(v) for v in vertices)
    lines = [f"s {len(vs)}"] + [str(v + 1) for v in vs]
    Path(path).write_text("\n".join(lines) + "\n")


def read_certificate(path) -> list[int]:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("s "):
        raise GraphFormatError("certificate must start with 's <cardinality>'")
    card = int(lines[0].split()[1])
    vs = [int(ln) - 1 for ln in lines[1:]]
    if len(vs) != card:
        raise GraphFormatError(f"header says {card} vertices, found {len(vs)}")
    if any(v < 0 for v in vs) or vs != sorted(set(vs)):
        raise GraphFormatError("vertex ids must be positive, unique and sorted")
    return vs
