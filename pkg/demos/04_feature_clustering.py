"""
Reducing redundant features to cluster medoids
==============================================

Groups of near-duplicate measurements are merged by complete linkage on
``1 - |corr|``; each group keeps its most central member.
"""

import numpy as np

from causeway import (
    Dataset,
    correlation_distance,
    correlation_matrix,
    cut_tree,
    hierarchical_cluster,
    reduce_dataset,
    select_medoids,
)
from causeway.clustering import diagnostics_curve

rng = np.random.default_rng(1)
cols, names = [], []
for g in range(4):
    base = rng.normal(size=2000)
    for r in range(3 + g):
        # the sign flip does not matter: distance uses |corr|
        sign = -1 if r == 1 else 1
        cols.append(sign * base + 0.3 * rng.normal(size=2000))
        names.append(f"G{g}_{r}")
data = Dataset(names, np.column_stack(cols))

corr = correlation_matrix(data)
tree = hierarchical_cluster(correlation_distance(corr), "complete")
print("merge heights:", np.round(tree.heights, 3))

for d in diagnostics_curve(tree, corr, [1, 2, 4, 8]):
    print(f"k={d.k}: mean within-cluster |corr| {d.mean_correlation:.2f}, mean size {d.mean_size:.1f}")

cl = select_medoids(cut_tree(tree, 4), corr)
print(cl.to_table(data.columns))
reduced = reduce_dataset(data, cl)
print("kept:", reduced.columns)
print(reduced.provenance.membership)
