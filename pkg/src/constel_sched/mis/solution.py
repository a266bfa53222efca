from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..graph import ScheduleGraph

CONVERGED = "converged"
TIME_LIMIT = "time_limit"
OPTIMAL_BOUND_HIT = "optimal_bound_hit"


class InvalidSolutionError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    time_limit: float | None = None
    seed: int = 0
    population_size: int = 8
    max_unsuccessful: int = 100
    upper_bound: int | None = None
    reductions: tuple[str, ...] = ("isolated", "pendant", "fold", "domination")

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.time_limit is not None and self.time_limit < 0:
            raise ValueError("time_limit must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class IndependentSetSolution:
    vertices: tuple[int, ...]
    solver: str
    wall_time: float = 0.0
    iterations: int = 0
    reduction_trace: list = field(default_factory=list)
    termination: str = CONVERGED
    optimal: bool = False

    @property
    def objective(self) -> int:
        return len(self.vertices)

    def __len__(self):
        return len(self.vertices)


def make_solution(g: ScheduleGraph, vertices: Iterable[int], solver: str, **meta) -> IndependentSetSolution:
    """Build a solution, refusing vertex sets that are not independent in ``g``."""
    vs = tuple(sorted(int(v) for v in set(vertices)))
    check_independent(g.adjacency(), vs)
    return IndependentSetSolution(vs, solver, **meta)


def check_independent(adj: Sequence[Sequence[int]], vertices: Iterable[int]) -> None:
    chosen = set(vertices)
    n = len(adj)
    for v in chosen:
        if not 0 <= v < n:
            raise InvalidSolutionError(f"vertex {v} out of range")
        for u in adj[v]:
            if u in chosen:
                raise InvalidSolutionError(f"vertices {v} and {u} are adjacent")


def is_independent(adj, vertices) -> bool:
    try:
        check_independent(adj, vertices)
    except InvalidSolutionError:
        return False
    return True


def is_maximal(adj, vertices) -> bool:
    """No vertex outside the set can be added."""
    chosen = set(vertices)
    for v in range(len(adj)):
        if v not in chosen and not any(u in chosen for u in adj[v]):
            return False
    return True


def rng_streams(seed: int, count: int) -> list[random.Random]:
    """Independent generators derived from one 64-bit seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [random.Random(int(c.generate_state(2, np.uint64)[0])) for c in children]
