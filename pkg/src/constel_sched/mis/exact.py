"""Exact branch-and-reduce for small graphs; used as the optimality oracle."""

from __future__ import annotations

import itertools
import sys
import time

from ..graph import ScheduleGraph
from .greedy import greedy_extend
from .local_search import improve
from .kernel import Reducer
from .solution import CONVERGED, TIME_LIMIT, IndependentSetSolution, make_solution


class _Timeout(Exception):
    pass


class _Search:
    def __init__(self, first_free_id: int, deadline: float | None):
        self.ids = itertools.count(first_free_id)
        self.deadline = deadline
        self.nodes = 0

    def tick(self) -> None:
        self.nodes += 1
        if self.deadline is not None and self.nodes % 64 == 0 and time.monotonic() > self.deadline:
            raise _Timeout


def clique_cover_bound(adj: dict[int, set[int]]) -> int:
    """Number of cliques in a greedy clique cover; bounds alpha from above."""
    cliques: list[list[int]] = []
    for v in sorted(adj, key=lambda x: (-len(adj[x]), x)):
        nv = adj[v]
        for members in cliques:
            if all(u in nv for u in members):
                members.append(v)
                break
        else:
            cliques.append([v])
    return len(cliques)


def _components(adj: dict[int, set[int]]) -> list[list[int]]:
    seen: set[int] = set()
    comps = []
    for root in sorted(adj):
        if root in seen:
            continue
        seen.add(root)
        comp, stack = [root], [root]
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    comp.append(u)
                    stack.append(u)
        comps.append(comp)
    return comps


def _solve(adj: dict[int, set[int]], lower: int, ctx: _Search) -> set[int] | None:
    """A maximum independent set of ``adj`` if it is larger than ``lower``, else None."""
    ctx.tick()
    work = {v: set(nb) for v, nb in adj.items()}
    red = Reducer(work, ctx.ids)
    red.run()
    base = red.gain
    if not work:
        sol = red.lift(())
        return sol if len(sol) > lower else None

    comps = _components(work)
    if len(comps) > 1:
        bounds = [clique_cover_bound({v: work[v] for v in c}) for c in comps]
        if base + sum(bounds) <= lower:
            return None
        total: set[int] = set()
        acc = base
        rest = sum(bounds)
        for comp, ub in zip(comps, bounds):
            rest -= ub
            need = lower - acc - rest
            r = _solve({v: work[v] for v in comp}, need, ctx)
            if r is None:
                return None
            total |= r
            acc += len(r)
        return red.lift(total)

    if base + clique_cover_bound(work) <= lower:
        return None
    v = max(work, key=lambda x: (len(work[x]), -x))
    closed = work[v] | {v}
    best: set[int] | None = None
    target = lower - base  # kernel solution must exceed this

    take = {u: work[u] - closed for u in work if u not in closed}
    r = _solve(take, target - 1, ctx)
    if r is not None:
        best = r | {v}
        target = len(best)

    skip = {u: work[u] - {v} for u in work if u != v}
    r = _solve(skip, target, ctx)
    if r is not None:
        best = r
    if best is None:
        return None
    return red.lift(best)


def exact_bnb(g: ScheduleGraph, time_limit: float | None = None) -> IndependentSetSolution:
    """Maximum independent set by branch-and-reduce.

    On timeout the best heuristic solution is returned with ``optimal=False``.
    """
    t0 = time.monotonic()
    deadline = None if time_limit is None else t0 + time_limit
    adj_list = g.adjacency()
    incumbent, _ = improve(adj_list, g.adjacency_sets(), greedy_extend(adj_list))
    ctx = _Search(g.n, deadline)
    adj = {v: set(nb) for v, nb in enumerate(adj_list)}
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 20 * g.n + 1000))
    try:
        found = _solve(adj, len(incumbent), ctx)
        optimal, termination = True, CONVERGED
        if found is not None:
            incumbent = found
    except _Timeout:
        optimal, termination = False, TIME_LIMIT
    finally:
        sys.setrecursionlimit(old_limit)
    return make_solution(
        g,
        incumbent,
        "exact",
        wall_time=time.monotonic() - t0,
        iterations=ctx.nodes,
        termination=termination,
        optimal=optimal,
    )
