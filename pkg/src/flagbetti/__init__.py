"""Betti numbers of Stanley-Reisner rings of random flag complexes."""

from ._validation import CapacityError, ConfigError, FlagBettiError, ParameterError
from .betti import (
    BettiTable,
    RingInvariants,
    betti_table,
    first_row,
    first_row_profile,
    regularity_bounds_check,
    reisner_is_cm,
    rho_k,
    ring_invariants,
)
from .counts import (
    count_dense_subgraphs,
    count_diamonds,
    expected_clique_count,
    expected_diamond_count,
    variance_ratio_estimate,
)
from .estimators import BettiTableTransformer, FirstRowTransformer, RingInvariantsTransformer
from .experiments import (
    ExperimentConfig,
    ExperimentSummary,
    betti_nonzero,
    run_normal,
    run_regularity_cm,
    run_rows,
    run_threshold,
    run_variance,
)
from .flag_complex import FlagComplex, build_flag_complex, diamond, link, link_of_face
from .graph import (
    Graph,
    SampleParams,
    cycle_census,
    graph_from_edgelist,
    graph_from_json,
    graph_to_edgelist,
    graph_to_json,
    induced_subgraph,
    sample_graph,
)
from .homology import HomologyProfile, boundary_matrix, rank_gf, reduced_homology_dims
from .oracle import cross_validate, taylor_betti_table, verify_extremal_lemma

__version__ = "0.1.0"

__all__ = [
    "BettiTable",
    "BettiTableTransformer",
    "CapacityError",
    "ConfigError",
    "ExperimentConfig",
    "ExperimentSummary",
    "FirstRowTransformer",
    "FlagBettiError",
    "FlagComplex",
    "Graph",
    "HomologyProfile",
    "ParameterError",
    "RingInvariants",
    "RingInvariantsTransformer",
    "SampleParams",
    "__version__",
    "betti_nonzero",
    "betti_table",
    "boundary_matrix",
    "build_flag_complex",
    "count_dense_subgraphs",
    "cross_validate",
    "count_diamonds",
    "cycle_census",
    "diamond",
    "expected_clique_count",
    "expected_diamond_count",
    "first_row",
    "first_row_profile",
    "graph_from_edgelist",
    "graph_from_json",
    "graph_to_edgelist",
    "graph_to_json",
    "induced_subgraph",
    "link",
    "link_of_face",
    "rank_gf",
    "reduced_homology_dims",
    "regularity_bounds_check",
    "reisner_is_cm",
    "rho_k",
    "ring_invariants",
    "run_normal",
    "run_regularity_cm",
    "run_rows",
    "run_threshold",
    "run_variance",
    "sample_graph",
    "taylor_betti_table",
    "variance_ratio_estimate",
    "verify_extremal_lemma",
]
