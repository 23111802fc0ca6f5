"""
Level-1 grading of a generated topology
=======================================

Builds a seeded 128-node topology, prints the priority classes found in
each region and the nodes kept for routing.
"""

from collections import Counter

from gradedroute.grading import GradingThresholds, grade_of, level1_select, priorities
from gradedroute.harness import TopologyParams, build_topology

topo = build_topology(TopologyParams(node_count=128, region_count=2), seed=7)
th = GradingThresholds().resolve(topo)
print(f"{topo.node_count} nodes, {len(topo.edges)} arcs, delay threshold {th.delay_threshold:.4g}")

prio = priorities(topo, th)
for region, members in sorted(topo.regions().items()):
    counts = Counter(prio[v] for v in members)
    row = "  ".join(f"P{p}(grade {grade_of(p):+d}): {counts[p]}" for p in sorted(counts))
    print(f"region {region}: {row}")

# %%
# Survivors form the subgraph that the genetic search runs on.
sub = level1_select(topo, th)
print(f"kept {len(sub.surviving_nodes)} of {topo.node_count} nodes, {len(sub.induced_edges)} arcs")
