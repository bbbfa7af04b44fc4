"""Synthetic assembly-line data and the cluster -> medoid -> PC demo.

Each station runs a few latent process variables; every process variable is
observed through several noisy, highly correlated measurements. Processes
may influence processes at the same or later stations, so station order
gives the tiers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .citest import correlation_matrix
from .clustering import (
    ClusterDiagnostics,
    cluster_diagnostics,
    correlation_distance,
    cut_tree,
    hierarchical_cluster,
    reduce_dataset,
    select_medoids,
)
from .dataset import Dataset
from .graph import PartialDAG
from .pc import PcConfig, pc
from .synth import GaussianBN, moment_stats, sample


def assembly_line_bn(n_stations: int = 4, processes: int = 3, measurements: int = 4,
                     jitter: float = 0.35, edge_prob: float = 0.35, seed: int = 0):
    """Return ``(bn, observed_columns, tiers)``.

    The BN holds latent process nodes followed by measurement nodes; only
    the measurement columns are meant to be observed.
    """
    rng = np.random.default_rng(seed)
    n_proc = n_stations * processes
    proc_names = [f"P{s + 1}_{k + 1}" for s in range(n_stations) for k in range(processes)]
    meas_names = [f"S{s + 1}_M{k + 1}_{r + 1}" for s in range(n_stations)
                  for k in range(processes) for r in range(measurements)]
    dag = PartialDAG(n_proc + len(meas_names), proc_names + meas_names)
    coefs: list[list[float]] = [[] for _ in range(dag.n_nodes)]
    for a in range(n_proc):
        for b in range(a + 1, n_proc):
            if rng.random() < edge_prob:
                dag.add_edge(a, b, directed=True)
    for v in range(n_proc):
        coefs[v] = list(rng.uniform(0.4, 1.2, len(dag.parents(v))) * rng.choice([-1, 1], len(dag.parents(v))))
    for p in range(n_proc):
        for r in range(measurements):
            m = n_proc + p * measurements + r
            dag.add_edge(p, m, directed=True)
            coefs[m] = [float(rng.uniform(0.8, 1.2))]
    noise = np.concatenate([np.ones(n_proc), np.full(len(meas_names), jitter)])
    bn = GaussianBN(dag, coefs, np.zeros(dag.n_nodes), noise)
    tiers = {name: int(name[1:].split("_")[0]) - 1 for name in meas_names}
    return bn, meas_names, tiers


def assembly_line_data(n: int = 20000, seed: int = 0, **kwargs) -> Dataset:
    """Standardized measurement columns with station tiers."""
    bn, observed, tiers = assembly_line_bn(seed=seed, **kwargs)
    full = sample(bn, n, seed)
    ds = full.select([full.index(c) for c in observed])
    ds.tiers = tiers
    return ds.standardized()


@dataclass
class DemoResult:
    n_features: int
    n_clusters: int
    diagnostics: ClusterDiagnostics
    normality_fraction: float
    edge_counts: dict[float, int]
    graphs: dict[float, PartialDAG]
    reduced: Dataset


def densification_demo(alphas=(0.001, 0.01, 0.05, 0.1), n: int = 20000, seed: int = 0,
                       k: int | None = None, soe: float = 0.0, **kwargs) -> DemoResult:
    """Cluster, keep medoids, and run tiered PC at each significance level."""
    data = assembly_line_data(n, seed, **kwargs)
    corr = correlation_matrix(data)
    tree = hierarchical_cluster(correlation_distance(corr), "complete")
    if k is None:
        k = kwargs.get("n_stations", 4) * kwargs.get("processes", 3)
    cl = select_medoids(cut_tree(tree, k), corr)
    reduced = reduce_dataset(data, cl)
    rcorr = correlation_matrix(reduced)
    knowledge = reduced.knowledge()
    graphs = {a: pc(rcorr, PcConfig(alpha=a, soe=soe), knowledge).graph for a in alphas}
    return DemoResult(
        n_features=data.n_cols,
        n_clusters=k,
        diagnostics=cluster_diagnostics(cl, corr),
        normality_fraction=moment_stats(reduced).fraction_within_range,
        edge_counts={a: g.n_edges for a, g in graphs.items()},
        graphs=graphs,
        reduced=reduced,
    )
