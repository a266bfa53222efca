from __future__ import annotations

import heapq
import random
import time
from typing import Iterable, Sequence

from ..graph import ScheduleGraph
from .solution import IndependentSetSolution, make_solution


def greedy_extend(
    adj: Sequence[Sequence[int]],
    selected: Iterable[int] = (),
    rng: random.Random | None = None,
) -> set[int]:
    """Grow ``selected`` to a maximal independent set.

    Repeatedly takes a free vertex of minimum degree among the free vertices.
    Ties go to the lower id, or to a random order when ``rng`` is given.
    """
    n = len(adj)
    chosen = set(selected)
    alive = [True] * n
    for v in chosen:
        alive[v] = False
        for u in adj[v]:
            alive[u] = False
    deg = [0] * n
    for v in range(n):
        if alive[v]:
            deg[v] = sum(1 for u in adj[v] if alive[u])
    if rng is None:
        key = list(range(n))
    else:
        key = list(range(n))
        rng.shuffle(key)
    heap = [(deg[v], key[v], v) for v in range(n) if alive[v]]
    heapq.heapify(heap)
    pop, push = heapq.heappop, heapq.heappush
    while heap:
        d, _, v = pop(heap)
        if not alive[v] or d != deg[v]:
            continue
        chosen.add(v)
        alive[v] = False
        for u in adj[v]:
            if alive[u]:
                alive[u] = False
                for w in adj[u]:
                    if alive[w]:
                        deg[w] -= 1
                        push(heap, (deg[w], key[w], w))
    return chosen


def greedy_seed(g: ScheduleGraph, rng: random.Random | None = None) -> IndependentSetSolution:
    """Maximal independent set by minimum-residual-degree selection."""
    t0 = time.monotonic()
    chosen = greedy_extend(g.adjacency(), rng=rng)
    return make_solution(g, chosen, "greedy", wall_time=time.monotonic() - t0)
