from __future__ import annotations

import time

from ..graph import ScheduleGraph
from .evolution import run_evolution
from .kernel import kernelize
from .local_search import improve
from .solution import (
    CONVERGED,
    OPTIMAL_BOUND_HIT,
    TIME_LIMIT,
    IndependentSetSolution,
    SolverConfig,
    make_solution,
    rng_streams,
)


def redumis_solve(g: ScheduleGraph, config: SolverConfig = SolverConfig()) -> IndependentSetSolution:
    """Kernelize, evolve on the kernel, lift, then polish on the full graph.

    ``config.upper_bound`` (for scheduling: the number of requests) stops the
    search as soon as a solution of that size is found.
    """
    t0 = time.monotonic()
    deadline = None if config.time_limit is None else t0 + config.time_limit
    bound = config.upper_bound

    kern = kernelize(g, config.reductions)
    generations = 0
    termination = CONVERGED
    if kern.graph.n == 0:
        lifted = kern.lift([])
    else:
        kb = None if bound is None else bound - kern.offset
        if kb is not None and kb <= 0:
            lifted = kern.lift([])
        else:
            res = run_evolution(kern.graph.adjacency(), config, deadline, kb)
            generations = res.generations
            termination = res.termination
            lifted = kern.lift(res.best)

    # lifting keeps independence but not maximality
    polish_rng = rng_streams(config.seed, config.population_size + 2)[-1]
    final, _ = improve(g.adjacency(), g.adjacency_sets(), lifted, polish_rng, deadline)
    if bound is not None and len(final) >= bound:
        termination = OPTIMAL_BOUND_HIT
    elif deadline is not None and time.monotonic() > deadline:
        termination = TIME_LIMIT
    return make_solution(
        g,
        final,
        "redumis",
        wall_time=time.monotonic() - t0,
        iterations=generations,
        reduction_trace=kern.summary(),
        termination=termination,
    )
