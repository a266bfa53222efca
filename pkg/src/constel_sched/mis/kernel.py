"""Exact reductions for maximum independent set, with solution lifting."""

from __future__ import annotations

import itertools
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from ..graph import ScheduleGraph

ALL_REDUCTIONS = ("isolated", "pendant", "fold", "domination")


class Reducer:
    """Applies reductions in place to a dict-of-sets graph.

    Vertex ids are arbitrary ints; folds create fresh ids from ``ids``. The
    trace records, in order, every step needed to map a solution of the
    remaining graph back to one of the input graph.
    """

    def __init__(self, adj: dict[int, set[int]], ids: Iterable[int], enabled=ALL_REDUCTIONS):
        self.adj = adj
        self.ids = iter(ids)
        unknown = set(enabled) - set(ALL_REDUCTIONS)
        if unknown:
            raise ValueError(f"unknown reductions: {sorted(unknown)}")
        self.enabled = frozenset(enabled)
        self.trace: list[tuple] = []
        self.gain = 0  # vertices the lifted solution gains over the kernel solution
        self._queue: deque[int] = deque()
        self._queued: set[int] = set()

    def _push(self, v: int) -> None:
        if v not in self._queued:
            self._queued.add(v)
            self._queue.append(v)

    def _delete(self, v: int) -> None:
        adj = self.adj
        for u in adj.pop(v):
            adj[u].discard(v)
            self._push(u)

    def _include(self, v: int, rule: str) -> None:
        adj = self.adj
        for u in list(adj[v]):
            if u in adj:
                self._delete(u)
        self._delete(v)
        self.trace.append((rule, v))
        self.gain += 1

    def _fold(self, v: int, u: int, w: int) -> None:
        adj = self.adj
        merged = (adj[u] | adj[w]) - {v, u, w}
        for x in (v, u, w):
            self._delete(x)
        new = next(self.ids)
        adj[new] = merged
        for z in merged:
            adj[z].add(new)
        self._push(new)
        self.trace.append(("fold", v, u, w, new))
        self.gain += 1

    def _dominate(self, v: int) -> bool:
        """Delete every neighbour u with N[v] contained in N[u]."""
        adj = self.adj
        hit = False
        for u in sorted(adj[v]):
            if u not in adj[v]:
                continue
            nv = adj[v]
            nu = adj[u]
            if len(nu) >= len(nv) and all(x == u or x in nu for x in nv):
                self._delete(u)
                self.trace.append(("dominated", u))
                hit = True
        return hit

    def run(self, vertices: Iterable[int] | None = None) -> None:
        adj = self.adj
        for v in sorted(adj) if vertices is None else vertices:
            self._push(v)
        en = self.enabled
        while self._queue:
            v = self._queue.popleft()
            self._queued.discard(v)
            if v not in adj:
                continue
            d = len(adj[v])
            if d == 0:
                if "isolated" in en:
                    self._include(v, "isolated")
                continue
            if d == 1:
                if "pendant" in en:
                    self._include(v, "pendant")
                continue
            if d == 2 and "fold" in en:
                u, w = sorted(adj[v])
                if w not in adj[u]:
                    self._fold(v, u, w)
                    continue
            if "domination" in en:
                self._dominate(v)

    def lift(self, kernel_solution: Iterable[int]) -> set[int]:
        sol = set(kernel_solution)
        for step in reversed(self.trace):
            rule = step[0]
            if rule == "fold":
                _, v, u, w, new = step
                if new in sol:
                    sol.remove(new)
                    sol.add(u)
                    sol.add(w)
                else:
                    sol.add(v)
            elif rule in ("isolated", "pendant"):
                sol.add(step[1])
        return sol


@dataclass
class Kernel:
    """Reduced graph plus what is needed to lift its solutions.

    ``graph`` is relabelled to ``0..k-1``; ``kernel_ids[i]`` is the working id
    of kernel vertex ``i``, which is an original vertex id when below
    ``n_original`` and a folded vertex otherwise.
    """

    graph: ScheduleGraph
    kernel_ids: np.ndarray
    n_original: int
    reducer: Reducer = field(repr=False)

    @property
    def trace(self) -> list[tuple]:
        return self.reducer.trace

    @property
    def offset(self) -> int:
        """Size difference between a lifted solution and the kernel solution."""
        return self.reducer.gain

    @property
    def forced_in(self) -> list[int]:
        """Vertices included outright by degree-0/1 rules (working ids)."""
        return sorted(s[1] for s in self.trace if s[0] in ("isolated", "pendant"))

    @property
    def excluded(self) -> list[int]:
        return sorted(s[1] for s in self.trace if s[0] == "dominated")

    def summary(self) -> list[tuple[str, int]]:
        counts = Counter(s[0] for s in self.trace)
        return [(rule, counts[rule]) for rule in ALL_REDUCTIONS if counts[rule]] + [
            ("kernel_vertices", self.graph.n)
        ]

    def lift(self, kernel_solution: Iterable[int]) -> list[int]:
        working = [int(self.kernel_ids[i]) for i in kernel_solution]
        out = self.reducer.lift(working)
        assert all(v < self.n_original for v in out), "lift left a folded vertex"
        return sorted(out)


def kernelize(g: ScheduleGraph, reductions=ALL_REDUCTIONS) -> Kernel:
    """Reduce ``g`` exhaustively with the enabled rules."""
    adj = {v: set(nb) for v, nb in enumerate(g.adjacency())}
    red = Reducer(adj, itertools.count(g.n), reductions)
    red.run()
    kernel_ids = np.array(sorted(adj), dtype=np.int64)
    pos = {int(v): i for i, v in enumerate(kernel_ids)}
    edges = [(pos[v], pos[u]) for v, nb in adj.items() for u in nb if v < u]
    kg = ScheduleGraph.from_edges(len(kernel_ids), np.array(edges, dtype=np.int64).reshape(-1, 2))
    return Kernel(kg, kernel_ids, g.n, red)
