"""Causal structure discovery for sequential (assembly-line) tabular data.

PC with tiered prior knowledge and a strength-of-effect cutoff, feature
reduction by correlation clustering, linear-Gaussian synthetic data and
precision/recall evaluation.
"""

__version__ = "0.1.0"

from .citest import (
    CiDecision,
    CorrelationMatrix,
    FisherZTest,
    cond_independent,
    correlation_matrix,
    fisher_z_test,
    partial_correlation,
)
from .clustering import (
    Clustering,
    Dendrogram,
    cluster_diagnostics,
    correlation_distance,
    cut_tree,
    hierarchical_cluster,
    reduce_dataset,
    select_medoids,
)
from .dataset import Dataset, ingest, read_tiers
from .evaluation import EvalReport, score_graphs, sweep, truth_pattern
from .export import export_graph, graph_from_json
from .graph import (
    Mark,
    OrientationLog,
    PartialDAG,
    SepsetMap,
    d_separated,
    random_consistent_extension,
    unshielded_triples,
)
from .pc import (
    DSeparationOracle,
    PcConfig,
    PriorKnowledge,
    apply_orientation_rules,
    apply_tiers,
    learn_skeleton,
    maximal_pattern,
    orient_colliders,
    pc,
)
from .synth import (
    GaussianBN,
    fit_gaussian_bn,
    implied_covariance,
    moment_stats,
    random_dag,
    random_gaussian_bn,
    sample,
)
