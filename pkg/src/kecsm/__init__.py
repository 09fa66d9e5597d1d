"""Randomized spanning-tree rounding for minimum-cost k-edge-connected
spanning multi-subgraphs, with the relaxation, fitting, sampling, and
certification machinery needed to test every claim at desk scale."""

from .core import (
    CutSpec,
    MetricInstance,
    MetricViolation,
    MultiEdgeSet,
    NotConnectedError,
    cut_size,
    global_min_cut,
    make_edge,
    metric_closure,
    validate_metric,
)
from .lp import (
    FractionalSolution,
    LPNotConvergedError,
    LPReport,
    separate,
    solve_lp,
    solve_lp_enumeration,
)
from .split import (
    SplitGraph,
    TreePolytopePoint,
    build_split_graph,
    check_tree_polytope,
    identify_back,
    to_tree_point,
)
from .treedist import (
    EdgeGraph,
    FitConvergenceError,
    LambdaWeights,
    MarginalVector,
    effective_resistance,
    fit_max_entropy,
    spanning_tree_count,
    tree_marginals,
)
from .sampler import (
    RngStream,
    SpanningTree,
    enumerate_spanning_trees,
    sample_batch,
    sample_fitted_batch,
    sample_fitted_tree,
    sample_tree,
    sample_tree_enumeration,
    tree_from_edges,
)
from .rounding import (
    RoundingOutput,
    RoundingParams,
    default_alpha,
    fundamental_cut_counts,
    mst,
    run_rounding,
    separates_u0_v0,
)
from .verify import (
    ApproxFactor,
    BernoulliSumStats,
    ConnectivityCertificate,
    approx_factor,
    brute_force_opt,
    bs_stats,
    chernoff_tail,
    verify_k_connectivity,
)
from .instances import (
    InstanceFormatError,
    euclidean_instance,
    load_instance,
    random_closure_instance,
)
from .pipeline import (
    ExperimentReport,
    PipelineResult,
    RunRecord,
    prepare,
    round_prepared,
    run_baseline,
    run_batch,
    run_pipeline,
)

__version__ = "0.1.0"
