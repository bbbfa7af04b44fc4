"""
Precision and recall over significance levels
=============================================

Replicated datasets from one generating network are scored at every
(alpha, soe) cell. Larger alpha keeps more edges: recall holds up while
precision slips.
"""

from causeway import PriorKnowledge, sweep, truth_pattern
from causeway.synth import random_dag, random_gaussian_bn

tiers = {v: v // 10 for v in range(30)}
bn = random_gaussian_bn(random_dag(30, 2.0, seed=0, tiers=tiers), seed=0)
knowledge = PriorKnowledge(tiers)

result = sweep(bn, truth_pattern(bn, knowledge), replicates=3, n=20000,
               alphas=(0.001, 0.01, 0.05, 0.1), soes=(0.0, 0.05), knowledge=knowledge)

print("alpha  soe   edges  und.prec  und.rec  dir.prec  dir.rec")
for c in result.cells:
    means = [c.mean(m) for m in ("undirected_precision", "undirected_recall",
                                 "directed_precision", "directed_recall")]
    edges = sum(c.edge_counts) / len(c.edge_counts)
    print(f"{c.alpha:<6} {c.soe:<5} {edges:5.1f}  " + "  ".join(f"{m:8.3f}" for m in means))

print(result.to_tsv().splitlines()[0])
