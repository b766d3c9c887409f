"""Exact and simulated expected values for random assignment problems.

An instance is an m-by-n cost matrix with a fixed set of forced zeros
and independent exponential mean-1 entries elsewhere, of which an
optimal k-assignment (k independent positions of minimum total cost)
is taken.  The package computes the exact expected optimal cost by
closed formulas and by an independent symbolic recursion, estimates it
and several usage probabilities by seeded Monte Carlo, and exposes the
underlying combinatorics (exact solvers, zero covers, cover profiles).
"""

from .covers import (
    CoverProfile,
    LineCover,
    column_maximal_cover,
    cover_profile,
    forced_cover_lines,
    is_partial_cover,
    max_independent_zeros,
    min_cover,
    row_excluded_profile,
    row_maximal_cover,
)
from .formulas import (
    FormulaReport,
    cover_formula_value,
    cs_value,
    gcd_group_sum,
    min_entry_usage_probability,
    parisi_value,
    row_inclusion_probability,
    triangle_integral,
)
from .model import (
    Assignment,
    BudgetExceededError,
    InvalidInstanceError,
    RapError,
    RapInstance,
    SampledMatrix,
    ZeroPattern,
    delete_column,
    delete_row,
    insert_zero,
    instance,
    load_instance,
    parse_instance,
    rational_from_json,
    rational_to_json,
    serialize_instance,
    transpose_instance,
)
from .montecarlo import (
    EstimateReport,
    estimate_entry_usage,
    estimate_min_entry_usage,
    estimate_row_usage,
    estimate_value,
    sample_matrix,
)
from .oracle import DEFAULT_NODE_BUDGET, oracle_expected_value, oracle_node_count
from .solver import (
    SolveResult,
    brute_force_k_assignment,
    enumerate_optimal_assignments,
    solve_k_assignment,
    symmetric_difference_paths,
    uses_row,
)

__version__ = "1.0.0"

__all__ = [
    "Assignment",
    "BudgetExceededError",
    "CoverProfile",
    "DEFAULT_NODE_BUDGET",
    "EstimateReport",
    "FormulaReport",
    "InvalidInstanceError",
    "LineCover",
    "RapError",
    "RapInstance",
    "SampledMatrix",
    "SolveResult",
    "ZeroPattern",
    "brute_force_k_assignment",
    "column_maximal_cover",
    "cover_formula_value",
    "cover_profile",
    "cs_value",
    "delete_column",
    "delete_row",
    "enumerate_optimal_assignments",
    "estimate_entry_usage",
    "estimate_min_entry_usage",
    "estimate_row_usage",
    "estimate_value",
    "forced_cover_lines",
    "gcd_group_sum",
    "insert_zero",
    "instance",
    "is_partial_cover",
    "load_instance",
    "max_independent_zeros",
    "min_cover",
    "min_entry_usage_probability",
    "oracle_expected_value",
    "oracle_node_count",
    "parisi_value",
    "parse_instance",
    "rational_from_json",
    "rational_to_json",
    "row_excluded_profile",
    "row_inclusion_probability",
    "row_maximal_cover",
    "sample_matrix",
    "serialize_instance",
    "solve_k_assignment",
    "symmetric_difference_paths",
    "transpose_instance",
    "triangle_integral",
    "uses_row",
]
