"""
Graded versus ungraded routing
==============================

A short sweep comparing routes found on the graded subgraph with routes
found on the full topology.  The CLI equivalent is
``gradedroute compare --nodes 8,32,64 --runs 10``.
"""

from gradedroute.harness import RunConfig, SweepParams, run_sweep

cfg = RunConfig(sweep=SweepParams(node_counts=(8, 32, 64), runs_per_count=10))
result = run_sweep(cfg)

cols = ("node_count", "mode", "failures", "mean_nodes_selected", "mean_route_length", "hit_rate")
print("  ".join(f"{c:>19}" for c in cols))
for row in result.aggregate:
    cells = []
    for c in cols:
        v = row[c]
        cells.append(f"{v:>19.3f}" if isinstance(v, float) else f"{str(v):>19}")
    print("  ".join(cells))

# %%
# The best graded route of the first 64-node run, with its history.
rep = next(r for n, _, r in result.runs if n == 64 and r.mode == "graded" and r.ok)
print("route:", rep.best_path, "bottleneck", round(rep.bottleneck, 2))
for h in rep.history:
    print(f"  gen {h['generation']}: best bottleneck {h['best_bottleneck']:.2f}, feasible members {h['feasible']}")
