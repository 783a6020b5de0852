"""Directed information network approximation.

Estimate directed information between discrete-time stochastic processes
and select bounded in-degree network structures: exact per-node search,
tree-constrained (connected) search via maximum-weight arborescences,
greedy selection with near-optimality guarantees, and ranked enumeration
of the r best structures.  A simulation harness reproduces the selection
studies on random stable AR(1) networks.
"""

from .arborescence import (
    Arborescence,
    EdgeWeights,
    augment_with_dummy_root,
    max_weight_arborescence,
)
from .approximation import (
    ConnectedApproximation,
    GreedyApproximation,
    constrained_best_sets,
    greedy_connected,
    greedy_general,
    optimal_connected,
    optimal_general,
)
from .bounds import (
    AlphaEstimate,
    bound_witness_alpha,
    coefficient_table,
    degree_gap_coefficient,
    empirical_alpha,
    geometric_budget_maximum,
    greedy_bound_coefficient,
    network_empirical_alpha,
)
from .errors import (
    DinetError,
    EstimationError,
    InfeasibleArborescenceError,
    NonStationaryModelError,
    PanelFormatError,
    UncachedParentSetError,
    ValidationError,
)
from .estimation import (
    DIEvaluator,
    EstimatorConfig,
    LinearNetworkModel,
    TimeSeriesPanel,
    build_cache,
    di_chain_rule,
    estimate_di,
    estimate_di_discrete,
    estimate_di_gaussian,
    exact_di_gaussian,
    read_panel_csv,
    stationary_covariance,
    write_panel_csv,
)
from .simulate import (
    ExperimentConfig,
    ExperimentResult,
    TrialReport,
    assignment_exact_score,
    generate_ar_network,
    ratio_greedy_optimal,
    ratio_to_true,
    run_experiment,
    simulate_panel,
    true_parent_assignment,
    write_experiment_csv,
)
from .structures import (
    DirectedInfoCache,
    ParentAssignment,
    ParentSet,
    ScoredApproximation,
    all_parent_sets,
    approximation_index,
    assignment_from_index,
    contains_spanning_arborescence,
    parent_set_from_index,
    parent_set_index,
    total_score,
)
from .topr import (
    TopR,
    get_new_solutions,
    top_r_connected,
    top_r_general,
    top_r_greedy,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaEstimate",
    "Arborescence",
    "ConnectedApproximation",
    "DIEvaluator",
    "DinetError",
    "DirectedInfoCache",
    "EdgeWeights",
    "EstimationError",
    "EstimatorConfig",
    "ExperimentConfig",
    "ExperimentResult",
    "GreedyApproximation",
    "InfeasibleArborescenceError",
    "LinearNetworkModel",
    "NonStationaryModelError",
    "PanelFormatError",
    "ParentAssignment",
    "ParentSet",
    "ScoredApproximation",
    "TimeSeriesPanel",
    "TopR",
    "TrialReport",
    "UncachedParentSetError",
    "ValidationError",
    "all_parent_sets",
    "approximation_index",
    "assignment_exact_score",
    "assignment_from_index",
    "augment_with_dummy_root",
    "bound_witness_alpha",
    "build_cache",
    "coefficient_table",
    "constrained_best_sets",
    "contains_spanning_arborescence",
    "degree_gap_coefficient",
    "di_chain_rule",
    "empirical_alpha",
    "estimate_di",
    "estimate_di_discrete",
    "estimate_di_gaussian",
    "exact_di_gaussian",
    "generate_ar_network",
    "geometric_budget_maximum",
    "get_new_solutions",
    "greedy_bound_coefficient",
    "greedy_connected",
    "greedy_general",
    "max_weight_arborescence",
    "network_empirical_alpha",
    "optimal_connected",
    "optimal_general",
    "parent_set_from_index",
    "parent_set_index",
    "ratio_greedy_optimal",
    "ratio_to_true",
    "read_panel_csv",
    "run_experiment",
    "simulate_panel",
    "stationary_covariance",
    "top_r_connected",
    "top_r_general",
    "top_r_greedy",
    "total_score",
    "true_parent_assignment",
    "write_experiment_csv",
    "write_panel_csv",
]
