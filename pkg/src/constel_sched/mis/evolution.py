from __future__ import annotations

import random
import time
from dataclasses import dataclass
from typing import Sequence

from ..graph import ScheduleGraph
from .greedy import greedy_extend
from .local_search import improve
from .partition import separator_from_adjacency
from .solution import (
    CONVERGED,
    OPTIMAL_BOUND_HIT,
    TIME_LIMIT,
    IndependentSetSolution,
    SolverConfig,
    make_solution,
    rng_streams,
)


@dataclass
class EvolutionResult:
    best: set[int]
    generations: int
    termination: str


def _tournament(pop: list[frozenset], rng: random.Random, avoid: int | None = None) -> int:
    k = len(pop)
    while True:
        a, b = rng.randrange(k), rng.randrange(k)
        pick = a if len(pop[a]) >= len(pop[b]) else b
        if pick != avoid or k == 1:
            return pick


def _evict_index(pop: list[frozenset], child: frozenset) -> int | None:
    """Member strictly worse than ``child`` sharing the most vertices with it.

    Ties go to the smaller member, then the lower index. None if no member is worse.
    """
    worse = [i for i, p in enumerate(pop) if len(p) < len(child)]
    if not worse:
        return None
    return min(worse, key=lambda i: (-len(pop[i] & child), len(pop[i]), i))


def run_evolution(
    adj: Sequence[Sequence[int]],
    config: SolverConfig,
    deadline: float | None = None,
    bound: int | None = None,
) -> EvolutionResult:
    """Steady-state evolutionary search on a plain adjacency list."""
    n = len(adj)
    adj_sets = [set(nb) for nb in adj]
    rngs = rng_streams(config.seed, config.population_size + 1)
    main = rngs[-1]

    def timed_out() -> bool:
        return deadline is not None and time.monotonic() > deadline

    def done(best: frozenset) -> bool:
        return bound is not None and len(best) >= bound

    pop: list[frozenset] = []
    for i in range(config.population_size):
        seed_rng = None if i == 0 else rngs[i]
        s = greedy_extend(adj, rng=seed_rng)
        s, _ = improve(adj, adj_sets, s, rngs[i], deadline)
        pop.append(frozenset(s))
        if timed_out() or done(pop[-1]):
            break
    best = max(pop, key=len)
    if done(best):
        return EvolutionResult(set(best), 0, OPTIMAL_BOUND_HIT)
    if timed_out():
        return EvolutionResult(set(best), 0, TIME_LIMIT)
    if n == 0 or len(pop) < 2:
        return EvolutionResult(set(best), 0, CONVERGED)

    generations = 0
    unsuccessful = 0
    termination = CONVERGED
    while unsuccessful < config.max_unsuccessful:
        if timed_out():
            termination = TIME_LIMIT
            break
        generations += 1
        i = _tournament(pop, main)
        j = _tournament(pop, main, avoid=i)
        v1, v2, _ = separator_from_adjacency(adj, main)
        a, b = pop[i], pop[j]
        children = []
        for x, y in ((a, b), (b, a)):
            partial = (x & v1) | (y & v2)
            children.append(greedy_extend(adj, partial, main))
        child = max(children, key=len)
        child, _ = improve(adj, adj_sets, child, main, deadline)
        child = frozenset(child)

        improved = len(child) > len(best)
        if child not in pop:
            k = _evict_index(pop, child)
            if k is not None:
                pop[k] = child
        if improved:
            best = child
            unsuccessful = 0
            if done(best):
                termination = OPTIMAL_BOUND_HIT
                break
        else:
            unsuccessful += 1
    return EvolutionResult(set(best), generations, termination)


def evolve(g: ScheduleGraph, config: SolverConfig = SolverConfig()) -> IndependentSetSolution:
    """Evolutionary MIS search without kernelization."""
    t0 = time.monotonic()
    deadline = None if config.time_limit is None else t0 + config.time_limit
    res = run_evolution(g.adjacency(), config, deadline, config.upper_bound)
    return make_solution(
        g,
        res.best,
        "evolve",
        wall_time=time.monotonic() - t0,
        iterations=res.generations,
        termination=res.termination,
    )
