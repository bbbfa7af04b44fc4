"""
Mixed graphs, d-separation and equivalence classes
==================================================

A chain and a collider look alike once the arrows are dropped; d-separation
tells them apart, and the pattern of a DAG records what data can reveal.
"""

from causeway import PartialDAG, d_separated, random_consistent_extension
from causeway.graph import colliders, unshielded_triples
from causeway.pc import maximal_pattern

# X -> Y -> Z and X -> W <- Z share the shape of their skeletons
chain = PartialDAG.from_edges(3, directed=[(0, 1), (1, 2)], labels="XYZ")
collider = PartialDAG.from_edges(3, directed=[(0, 1), (2, 1)], labels="XWZ")

print("chain    X _||_ Z        :", d_separated(chain, 0, 2))
print("chain    X _||_ Z | Y    :", d_separated(chain, 0, 2, {1}))
print("collider X _||_ Z        :", d_separated(collider, 0, 2))
print("collider X _||_ Z | W    :", d_separated(collider, 0, 2, {1}))

# both have the unshielded triple X - . - Z, only one has a collider there
print(unshielded_triples(chain), colliders(chain))
print(unshielded_triples(collider), colliders(collider))

# the pattern keeps colliders and leaves the rest undirected
print(maximal_pattern(chain))
print(maximal_pattern(collider))

# members of the chain's class, drawn with different seeds
pattern = maximal_pattern(chain)
members = {tuple(sorted(random_consistent_extension(pattern, s).directed_edges())) for s in range(20)}
for m in sorted(members):
    print("member:", m)
