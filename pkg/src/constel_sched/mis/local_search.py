from __future__ import annotations

import random
import time
from collections import deque
from typing import Iterable, Sequence

from ..graph import ScheduleGraph
from .solution import IndependentSetSolution, check_independent, make_solution


class _SwapState:
    """Solution membership plus, per vertex, the number of solution neighbours."""

    def __init__(self, adj: Sequence[Sequence[int]], adj_sets: Sequence[set[int]], vertices: Iterable[int]):
        self.adj = adj
        self.adj_sets = adj_sets
        n = len(adj)
        self.in_sol = [False] * n
        self.tight = [0] * n
        for v in vertices:
            self.insert(v)

    def insert(self, v: int) -> None:
        self.in_sol[v] = True
        tight = self.tight
        for u in self.adj[v]:
            tight[u] += 1

    def remove(self, v: int) -> None:
        self.in_sol[v] = False
        tight = self.tight
        for u in self.adj[v]:
            tight[u] -= 1

    def find_swap(self, x: int) -> tuple[int, int] | None:
        """Two non-adjacent 1-tight neighbours of solution vertex ``x``."""
        tight = self.tight
        cand = [u for u in self.adj[x] if tight[u] == 1]
        if len(cand) < 2:
            return None
        adj_sets = self.adj_sets
        for i, u in enumerate(cand):
            nu = adj_sets[u]
            for w in cand[i + 1 :]:
                if w not in nu:
                    return u, w
        return None

    def solution(self) -> set[int]:
        return {v for v, s in enumerate(self.in_sol) if s}


def improve(
    adj: Sequence[Sequence[int]],
    adj_sets: Sequence[set[int]],
    vertices: Iterable[int],
    rng: random.Random | None = None,
    deadline: float | None = None,
) -> tuple[set[int], int]:
    """Apply (1,2)-swaps and free insertions until none remain.

    Returns the improved set and the number of swaps performed. ``vertices``
    must be independent; it need not be maximal.
    """
    st = _SwapState(adj, adj_sets, vertices)
    in_sol, tight = st.in_sol, st.tight
    n = len(adj)

    order = list(range(n))
    if rng is not None:
        rng.shuffle(order)
    for v in order:
        if not in_sol[v] and tight[v] == 0:
            st.insert(v)

    queue = deque(v for v in order if in_sol[v])
    queued = [False] * n
    for v in queue:
        queued[v] = True
    swaps = 0
    steps = 0
    while queue:
        steps += 1
        if deadline is not None and steps % 256 == 0 and time.monotonic() > deadline:
            break
        x = queue.popleft()
        queued[x] = False
        if not in_sol[x]:
            continue
        pair = st.find_swap(x)
        if pair is None:
            continue
        u, w = pair
        st.remove(x)
        st.insert(u)
        st.insert(w)
        swaps += 1
        added = [u, w]
        for z in adj[x]:
            if not in_sol[z] and tight[z] == 0:
                st.insert(z)
                added.append(z)
        # any solution vertex next to a vertex whose tightness changed may have a new swap
        for c in [x, *added]:
            for z in adj[c]:
                for y in adj[z]:
                    if in_sol[y] and not queued[y]:
                        queued[y] = True
                        queue.append(y)
        for y in added:
            if not queued[y]:
                queued[y] = True
                queue.append(y)
    return st.solution(), swaps


def two_improvement(
    g: ScheduleGraph,
    sol: IndependentSetSolution | Iterable[int],
    rng: random.Random | None = None,
    deadline: float | None = None,
) -> IndependentSetSolution:
    """Local search with (1,2)-swaps; the result is maximal and never smaller."""
    t0 = time.monotonic()
    vertices = sol.vertices if isinstance(sol, IndependentSetSolution) else tuple(sol)
    adj = g.adjacency()
    check_independent(adj, vertices)
    out, swaps = improve(adj, g.adjacency_sets(), vertices, rng, deadline)
    return make_solution(g, out, "two_improvement", wall_time=time.monotonic() - t0, iterations=swaps)
