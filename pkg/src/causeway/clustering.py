"""Feature reduction by agglomerative clustering on ``1 - |corr|``.

Clusters are cut from the dendrogram by undoing the last ``k - 1`` merges;
each cluster is represented by its medoid, the member with the highest
mean absolute correlation to the other members.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.cluster import hierarchy
from scipy.spatial.distance import squareform

from .citest import CorrelationMatrix
from .exceptions import ValidationError

LINKAGES = ("complete", "average", "median", "centroid", "ward")


def correlation_distance(c: CorrelationMatrix) -> np.ndarray:
    d = 1.0 - np.abs(np.asarray(c.values, dtype=float))
    np.fill_diagonal(d, 0.0)
    return d


@dataclass(frozen=True)
class Dendrogram:
    """Merge history in scipy linkage convention.

    ``merges[k] = (a, b, height)``: leaves are ``0..n-1`` and the cluster
    created by merge ``k`` gets id ``n + k``.
    """

    linkage: np.ndarray
    n_leaves: int
    method: str = "complete"

    @property
    def merges(self) -> list[tuple[int, int, float]]:
        return [(int(a), int(b), float(h)) for a, b, h, _ in self.linkage]

    @property
    def heights(self) -> np.ndarray:
        return self.linkage[:, 2].copy()

    @property
    def leaf_order(self) -> list[int]:
        if self.n_leaves == 1:
            return [0]
        return [int(v) for v in hierarchy.leaves_list(self.linkage)]

    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.linkage[:, 2]) >= 0))


def hierarchical_cluster(d, linkage: str = "complete") -> Dendrogram:
    """Agglomerative clustering of a square distance matrix."""
    if linkage not in LINKAGES:
        raise ValidationError(f"unknown linkage {linkage!r}; choose from {LINKAGES}")
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValidationError("distance matrix must be square")
    if not np.allclose(d, d.T, atol=1e-12):
        raise ValidationError("distance matrix must be symmetric")
    if np.any(d < 0) or np.any(np.diag(d) != 0):
        raise ValidationError("distances must be non-negative with a zero diagonal")
    n = d.shape[0]
    if n == 1:
        return Dendrogram(np.zeros((0, 4)), 1, linkage)
    z = hierarchy.linkage(squareform(d, checks=False), method=linkage)
    return Dendrogram(z, n, linkage)


@dataclass(frozen=True)
class Clustering:
    """``assignment[v]`` is the cluster id of node ``v``; ids are ``0..k-1``
    numbered by the smallest member. ``medoids`` maps cluster id to node."""

    assignment: tuple[int, ...]
    medoids: dict[int, int] | None = None

    @property
    def n_clusters(self) -> int:
        return len(set(self.assignment))

    def members(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for v, cid in enumerate(self.assignment):
            out.setdefault(cid, []).append(v)
        return out

    def medoid_nodes(self) -> list[int]:
        if self.medoids is None:
            raise ValidationError("medoids have not been selected")
        return sorted(self.medoids.values())

    def to_table(self, labels) -> str:
        """``feature<TAB>cluster-id`` rows followed by nothing else."""
        return "".join(f"{labels[v]}\t{cid}\n" for v, cid in enumerate(self.assignment))

    def medoid_list(self, labels) -> str:
        return "".join(f"{labels[v]}\n" for v in self.medoid_nodes())


def _relabel(raw) -> tuple[int, ...]:
    ids: dict[int, int] = {}
    for r in raw:
        ids.setdefault(r, len(ids))
    return tuple(ids[r] for r in raw)


def cut_tree(t: Dendrogram, k: int) -> Clustering:
    """Exactly ``k`` clusters, obtained by applying the first ``n - k`` merges."""
    n = t.n_leaves
    if not 1 <= k <= n:
        raise ValidationError(f"k must lie in [1, {n}], got {k}")
    parent = list(range(2 * n - 1))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for step, (a, b, _) in enumerate(t.merges[: n - k]):
        parent[find(a)] = n + step
        parent[find(b)] = n + step
    return Clustering(_relabel([find(v) for v in range(n)]))


def _mean_abs_corr(values: np.ndarray, v: int, others) -> float:
    others = [u for u in others if u != v]
    return float(np.mean(np.abs(values[v, others])))


def select_medoids(cl: Clustering, c: CorrelationMatrix) -> Clustering:
    """Per cluster, the member maximizing mean ``|corr|`` to the other members.

    Ties go to the smallest node index.
    """
    if len(cl.assignment) != c.dim:
        raise ValidationError("clustering and correlation matrix cover different nodes")
    medoids = {}
    for cid, members in cl.members().items():
        if len(members) == 1:
            medoids[cid] = members[0]
            continue
        best, best_score = members[0], -np.inf
        for v in members:
            score = _mean_abs_corr(c.values, v, members)
            if score > best_score:
                best, best_score = v, score
        medoids[cid] = best
    return Clustering(cl.assignment, medoids)


@dataclass(frozen=True)
class ClusterDiagnostics:
    k: int
    min_correlation: float
    max_correlation: float
    mean_correlation: float
    min_size: int
    max_size: int
    mean_size: float


def within_cluster_correlation(members, values: np.ndarray) -> float:
    """Mean pairwise ``|corr|`` over distinct members; 1.0 for a singleton."""
    if len(members) == 1:
        return 1.0
    sub = np.abs(values[np.ix_(members, members)])
    iu = np.triu_indices(len(members), 1)
    return float(sub[iu].mean())


def cluster_diagnostics(cl: Clustering, c: CorrelationMatrix) -> ClusterDiagnostics:
    groups = list(cl.members().values())
    corr = np.array([within_cluster_correlation(m, c.values) for m in groups])
    sizes = np.array([len(m) for m in groups])
    return ClusterDiagnostics(len(groups), float(corr.min()), float(corr.max()), float(corr.mean()),
                              int(sizes.min()), int(sizes.max()), float(sizes.mean()))


def diagnostics_curve(t: Dendrogram, c: CorrelationMatrix, ks) -> list[ClusterDiagnostics]:
    return [cluster_diagnostics(cut_tree(t, k), c) for k in ks]


def reduce_dataset(data, cl: Clustering):
    """Keep only medoid columns (in index order) and record cluster membership."""
    keep = cl.medoid_nodes()
    out = data.select(keep)
    groups = cl.members()
    by_medoid = {m: groups[cid] for cid, m in cl.medoids.items()}
    out.provenance.membership = {
        data.columns[m]: [data.columns[v] for v in by_medoid[m]] for m in keep}
    out.provenance.steps.append(f"reduced {data.n_cols} columns to {len(keep)} cluster medoids")
    return out
