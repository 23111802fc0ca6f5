"""
Genetic operators on a pair of routes
=====================================

Single-point crossover, PMX, repair and insertion mutation applied to two
seven-node routes over a fully connected graph.
"""

from gradedroute.ga import insertion_mutation, pmx_crossover, repair, single_point_crossover
from gradedroute.grading import full_subgraph
from gradedroute.netmodel import Edge, Node, Topology

p1 = (1, 2, 3, 4, 5, 6, 7)
p2 = (1, 3, 4, 6, 2, 5, 7)

# %%
# Tail swap at position 4.  The children repeat genes, so they are not
# routes yet.
o1, o2 = single_point_crossover(p1, p2, 4)
print("single point:", o1, o2)

# %%
# Repair cuts the loop between the two copies of a repeated node.
n = 8
topo = Topology(
    tuple(Node(i, 0) for i in range(n)),
    tuple(Edge(u, v, 10.0) for u in range(n) for v in range(n) if u != v),
    source=1,
    destination=7,
)
sub = full_subgraph(topo)
print("repaired:", repair(o1, sub), repair(o2, sub))

# %%
# PMX keeps each child a permutation of the shared gene set.
print("pmx (3, 5):", *pmx_crossover(p1, p2, (3, 5)))

# %%
# Insertion mutation adds an off-route node between two route nodes.
print("mutated:", insertion_mutation((1, 4, 7), 0, 2, sub))
