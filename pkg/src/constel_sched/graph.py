"""Compressed sparse graph container shared by the graph builders and solvers."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

INFEASIBILITY = "infeasibility"
FEASIBILITY = "feasibility"


class GraphFormatError(ValueError):
    pass


@dataclass(eq=False)
class ScheduleGraph:
    """Graph over collects in CSR form.

    ``edges`` holds every edge once: (i, j) with i < j for the undirected
    infeasibility graph, (earlier, later) for the feasibility DAG. ``indptr`` /
    ``indices`` are the sorted out-neighbour lists; for undirected graphs they
    are symmetric. ``payload`` maps field names (sat, tile, request, t_start,
    weight) to per-vertex arrays and may be empty for plain graphs.
    """

    n: int
    edges: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    kind: str = INFEASIBILITY
    payload: dict = field(default_factory=dict)
    _adj: list | None = field(default=None, repr=False)

    @classmethod
    def from_edges(cls, n: int, edges, kind: str = INFEASIBILITY, payload: dict | None = None) -> ScheduleGraph:
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if len(e) and (e.min() < 0 or e.max() >= n):
            raise ValueError("edge endpoint out of range")
        if np.any(e[:, 0] == e[:, 1]):
            raise ValueError("self-loops are not allowed")
        directed = kind == FEASIBILITY
        if not directed:
            e = np.sort(e, axis=1)
        if len(e):
            e = np.unique(e, axis=0)
        if directed:
            src, dst = e[:, 0], e[:, 1]
        else:
            src = np.concatenate([e[:, 0], e[:, 1]])
            dst = np.concatenate([e[:, 1], e[:, 0]])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        indptr = np.cumsum(indptr)
        return cls(n, e, indptr, dst.astype(np.int64), kind, dict(payload or {}))

    @property
    def directed(self) -> bool:
        return self.kind == FEASIBILITY

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def adjacency(self) -> list[list[int]]:
        """Neighbour lists as plain Python lists (cached)."""
        if self._adj is None:
            idx = self.indices.tolist()
            ptr = self.indptr.tolist()
            self._adj = [idx[ptr[v] : ptr[v + 1]] for v in range(self.n)]
        return self._adj

    def adjacency_sets(self) -> list[set[int]]:
        return [set(nb) for nb in self.adjacency()]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        k = np.searchsorted(nb, v)
        return bool(k < len(nb) and nb[k] == v)

    def edge_set(self) -> set[tuple[int, int]]:
        """Edges as unordered pairs (i < j), regardless of kind."""
        e = np.sort(self.edges, axis=1) if len(self.edges) else self.edges
        return set(map(tuple, e.tolist()))

    def subgraph(self, keep) -> tuple[ScheduleGraph, np.ndarray]:
        """Induced subgraph on ``keep``; returns it with the old ids of new vertices."""
        keep = np.unique(np.asarray(list(keep), dtype=np.int64))
        remap = np.full(self.n, -1, dtype=np.int64)
        remap[keep] = np.arange(len(keep))
        e = self.edges
        if len(e):
            both = (remap[e[:, 0]] >= 0) & (remap[e[:, 1]] >= 0)
            e = remap[e[both]]
        payload = {k: np.asarray(v)[keep] for k, v in self.payload.items()}
        return ScheduleGraph.from_edges(len(keep), e, self.kind, payload), keep


def write_dimacs(g: ScheduleGraph, path) -> None:
    """``p edge n m`` then ``e u v`` lines, 1-based, each undirected edge once."""
    e = np.sort(g.edges, axis=1) if len(g.edges) else g.edges
    with open(path, "w") as fh:
        fh.write(f"p edge {g.n} {len(e)}\n")
        for u, v in e.tolist():
            fh.write(f"e {u + 1} {v + 1}\n")


def read_dimacs(path) -> ScheduleGraph:
    n = None
    edges = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        parts = line.split()
        if not parts or parts[0] == "c":
            continue
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] not in ("edge", "col"):
                raise GraphFormatError(f"line {lineno}: bad problem line {line!r}")
            n, m = int(parts[2]), int(parts[3])
        elif parts[0] == "e":
            if n is None:
                raise GraphFormatError(f"line {lineno}: edge before problem line")
            u, v = int(parts[1]), int(parts[2])
            if not (1 <= u <= n and 1 <= v <= n) or u == v:
                raise GraphFormatError(f"line {lineno}: bad edge {u} {v}")
            edges.append((u - 1, v - 1))
        else:
            raise GraphFormatError(f"line {lineno}: unknown record {parts[0]!r}")
    if n is None:
        raise GraphFormatError("missing problem line")
    if len(edges) != m:
        raise GraphFormatError(f"problem line declares {m} edges, found {len(edges)}")
    return ScheduleGraph.from_edges(n, edges)
