"""Independent set solvers over schedule graphs."""

from .certificate import read_certificate, write_certificate
from .evolution import evolve
from .exact import clique_cover_bound, exact_bnb
from .greedy import greedy_extend, greedy_seed
from .kernel import ALL_REDUCTIONS, Kernel, kernelize
from .local_search import two_improvement
from .partition import partition_separator
from .redumis import redumis_solve
from .solution import (
    CONVERGED,
    OPTIMAL_BOUND_HIT,
    TIME_LIMIT,
    IndependentSetSolution,
    InvalidSolutionError,
    SolverConfig,
    is_independent,
    is_maximal,
    make_solution,
)

__all__ = [
    "ALL_REDUCTIONS",
    "CONVERGED",
    "OPTIMAL_BOUND_HIT",
    "TIME_LIMIT",
    "IndependentSetSolution",
    "InvalidSolutionError",
    "Kernel",
    "SolverConfig",
    "clique_cover_bound",
    "evolve",
    "exact_bnb",
    "greedy_extend",
    "greedy_seed",
    "is_independent",
    "is_maximal",
    "kernelize",
    "make_solution",
    "partition_separator",
    "read_certificate",
    "redumis_solve",
    "two_improvement",
    "write_certificate",
]
