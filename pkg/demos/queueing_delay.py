"""
Queueing delay of a node's outgoing channels
============================================

Mean M/M/1 occupancy and the network delay formula, then the delay each
node receives when traffic is annotated on a small topology.
"""

import numpy as np

from gradedroute.harness import TopologyParams, build_topology
from gradedroute.queueing import FlowModel, QueueParams, mm1_mean, network_delay

for rho in (0.1, 0.5, 0.9, 0.99):
    jobs, per_rate = mm1_mean(QueueParams(rho, lam=2.0))
    print(f"rho={rho:<5} jobs={jobs:8.3f}  jobs/lambda={per_rate:8.3f}")

# %%
# Two channels of capacity 3 carrying one unit each.
print("T =", network_delay(FlowModel([1.0, 1.0], [3.0, 3.0], mu=1.0, gamma=2.0)))

# %%
# build_topology annotates per-node delay; saturated nodes get inf.
topo = build_topology(TopologyParams(node_count=16), seed=3)
delays = np.array([n.metrics.delay for n in topo.nodes])
print("finite delays:", np.round(delays[np.isfinite(delays)], 4))
print("saturated nodes:", np.flatnonzero(~np.isfinite(delays)).tolist())
