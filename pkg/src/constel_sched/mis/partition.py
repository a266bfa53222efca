from __future__ import annotations

import random
from collections import deque
from typing import Sequence

from ..graph import ScheduleGraph


def _bfs(adj: Sequence[Sequence[int]], root: int, seen) -> list[int]:
    """BFS order from ``root``; ``seen`` is a bool list or a set, updated in place."""
    as_set = isinstance(seen, set)
    order = [root]
    if as_set:
        seen.add(root)
    else:
        seen[root] = True
    q = deque([root])
    while q:
        v = q.popleft()
        for u in adj[v]:
            if not (u in seen if as_set else seen[u]):
                if as_set:
                    seen.add(u)
                else:
                    seen[u] = True
                order.append(u)
                q.append(u)
    return order


def separator_from_adjacency(
    adj: Sequence[Sequence[int]], rng: random.Random | None = None
) -> tuple[set[int], set[int], set[int]]:
    n = len(adj)
    roots = list(range(n))
    if rng is not None:
        rng.shuffle(roots)
    seen = [False] * n
    order: list[int] = []
    for r in roots:
        if seen[r]:
            continue
        # restart from the far end of the component for a long, thin BFS layering
        probe = _bfs(adj, r, set())
        far = probe[-1]
        order.extend(_bfs(adj, far, seen))
    half = (n + 1) // 2
    left = set(order[:half])
    right = set(order[half:])
    sep = {v for v in left if any(u in right for u in adj[v])}
    return left - sep, right, sep


def partition_separator(
    g: ScheduleGraph, rng: random.Random | None = None
) -> tuple[set[int], set[int], set[int]]:
    """Split the vertices into ``(V1, V2, Vs)`` with no edge between V1 and V2.

    Vertices are laid out in BFS order from a pseudo-peripheral vertex; the
    first half becomes V1 except for the boundary vertices, which form Vs.
    """
    return separator_from_adjacency(g.adjacency(), rng)
