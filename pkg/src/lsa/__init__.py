"""Combinatorial analysis of redundant dictionaries.

Invariants (coherence, spark, generalized coherence), exhaustive
list-sparse / list-approx solvers, the worst-case dictionary
constructions they are tested against, closed-form list-size bounds with
an empirical soundness harness, and a Haar wavelet-packet compression
lab.  See README.md for the CLI and HTTP service.
"""

from .core import (
    INFINITE,
    RANK_TOL,
    Dictionary,
    InvariantReport,
    coherence,
    generalized_coherence,
    invariant_report,
    new_dictionary,
    principal_angle_cos,
    spark,
    support_rank,
)
from .solvers import (
    SolutionList,
    SparseSolution,
    find_multi_solution_witness,
    least_squares,
    monte_carlo_list_stats,
    restricted_list_size,
    solve_list_approx,
    solve_list_sparse,
)

__version__ = "0.1.0"

__all__ = [
    "INFINITE",
    "RANK_TOL",
    "Dictionary",
    "InvariantReport",
    "SolutionList",
    "SparseSolution",
    "coherence",
    "find_multi_solution_witness",
    "generalized_coherence",
    "invariant_report",
    "least_squares",
    "monte_carlo_list_stats",
    "new_dictionary",
    "principal_angle_cos",
    "restricted_list_size",
    "solve_list_approx",
    "solve_list_sparse",
    "spark",
    "support_rank",
    "__version__",
]
