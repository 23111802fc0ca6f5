"""Graded vs. ungraded experiment runner, brute-force oracle and knowledge base."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Mapping, Sequence

import networkx as nx
import numpy as np

from . import ga
from .errors import Disconnected, InvalidConfig, NoRoute, StorageError
from .grading import GradedSubgraph, GradingThresholds, full_subgraph, level1_select
from .netmodel import (
    DEFAULT_BANDWIDTH_RANGE,
    DEFAULT_LIFETIME_RANGE,
    Topology,
    assign_attributes,
    generate_topology,
    topology_digest,
)
from .queueing import annotate_delays

MODES = ("graded", "ungraded")
DEFAULT_NODE_COUNTS = (4, 8, 16, 32, 64, 128, 256)

# Reference values from the published comparison (shortest-path hit rate).
REFERENCE_HIT_RATE = {"graded": 0.90, "ungraded": 0.83}


def default_region_count(node_count: int) -> int:
    """Regions of about 64 nodes, never fewer than two."""
    return min(node_count, max(2, node_count // 64))


def derive_seed(*keys: int) -> int:
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1, np.uint64)[0])


# -- configuration -------------------------------------------------------------


@dataclass(frozen=True)
class TopologyParams:
    node_count: int = 32
    region_count: int | None = None
    edge_density: float = 0.3
    # overrides edge_density when set: target in-degree of every node
    mean_degree: float | None = 4.0
    inter_link_fraction: float | None = 0.5
    utilisation_range: tuple[float, float] = (0.0, 1.0)
    bandwidth_range: tuple[float, float] = DEFAULT_BANDWIDTH_RANGE
    lifetime_range: tuple[int, int] = DEFAULT_LIFETIME_RANGE
    capacity_range: tuple[float, float] | None = None
    resource_probability: float = 0.8
    mu: float = 1.0

    def __post_init__(self):
        for name in ("bandwidth_range", "lifetime_range", "capacity_range", "utilisation_range"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, tuple(value))


@dataclass(frozen=True)
class SweepParams:
    node_counts: tuple[int, ...] = DEFAULT_NODE_COUNTS
    runs_per_count: int = 25
    base_seed: int = 2012
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "node_counts", tuple(int(n) for n in self.node_counts))
        if not self.node_counts:
            raise InvalidConfig("node_counts must be nonempty")
        if self.runs_per_count < 1:
            raise InvalidConfig("runs_per_count must be >= 1")


@dataclass(frozen=True)
class RunConfig:
    topology: TopologyParams = field(default_factory=TopologyParams)
    grading: GradingThresholds = field(default_factory=GradingThresholds)
    ga: ga.GaConfig = field(default_factory=ga.GaConfig)
    sweep: SweepParams = field(default_factory=SweepParams)
    oracle_cap: int = 14

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidConfig(f"unknown config sections: {sorted(unknown)}")
        parts = {
            "topology": TopologyParams,
            "grading": GradingThresholds,
            "ga": ga.GaConfig,
            "sweep": SweepParams,
        }
        kwargs = {}
        for name, klass in parts.items():
            section = dict(data.get(name, {}))
            allowed = {f.name for f in fields(klass)}
            bad = set(section) - allowed
            if bad:
                raise InvalidConfig(f"unknown keys in {name!r}: {sorted(bad)}")
            try:
                kwargs[name] = klass(**section)
            except TypeError as exc:
                raise InvalidConfig(str(exc)) from exc
        if "oracle_cap" in data:
            kwargs["oracle_cap"] = int(data["oracle_cap"])
        return cls(**kwargs)

    def digest(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def build_topology(params: TopologyParams, seed: int) -> Topology:
    """Generate, populate and delay-annotate one topology."""
    regions = params.region_count or default_region_count(params.node_count)
    density = params.edge_density
    if params.mean_degree is not None:
        size = params.node_count // regions
        density = min(1.0, params.mean_degree / max(size - 1, 1))
    topo = generate_topology(
        params.node_count,
        regions,
        density,
        derive_seed(seed, 0),
        capacity_range=params.capacity_range or params.bandwidth_range,
        inter_link_fraction=params.inter_link_fraction,
    )
    topo = assign_attributes(
        topo,
        derive_seed(seed, 1),
        bandwidth_range=params.bandwidth_range,
        lifetime_range=params.lifetime_range,
        resource_probability=params.resource_probability,
        utilisation_range=params.utilisation_range,
    )
    return annotate_delays(topo, mu=params.mu)


# -- oracle ------------------------------------------------------------------------


def _as_subgraph(graph) -> GradedSubgraph:
    return full_subgraph(graph) if isinstance(graph, Topology) else graph


def oracle_best_path(graph, bandwidth: Mapping[int, float], demand: float) -> tuple[int, ...]:
    """Exhaustive search for the reference route.

    Among paths whose bottleneck meets ``demand`` pick the fewest hops, then
    the widest, then the lexicographically smallest.  When no path meets
    the demand, pick the widest, then fewest hops, then lexicographic.
    """
    sub = _as_subgraph(graph)
    g = nx.DiGraph()
    g.add_nodes_from(sub.surviving_nodes)
    g.add_edges_from(sub.induced_edges)
    best_ok = best_any = None
    for p in nx.all_simple_paths(g, sub.source, sub.destination):
        p = tuple(p)
        width = min(bandwidth[v] for v in p)
        if width >= demand:
            key = (len(p), -width, p)
            if best_ok is None or key < best_ok:
                best_ok = key
        key = (-width, len(p), p)
        if best_any is None or key < best_any:
            best_any = key
    if best_any is None:
        raise NoRoute(f"no path from {sub.source} to {sub.destination}")
    return best_ok[2] if best_ok is not None else best_any[2]


def path_score(path: Sequence[int], bandwidth: Mapping[int, float], demand: float):
    width = min(bandwidth[v] for v in path)
    return (width >= demand, len(path) - 1, width)


# -- single run --------------------------------------------------------------------


@dataclass
class RunReport:
    mode: str
    status: str
    total_nodes: int
    survivors: int
    nodes_selected: int
    best_path: tuple[int, ...] = ()
    route_length: int | None = None
    report_fitness: float | None = None
    bottleneck: float | None = None
    feasible: bool | None = None
    oracle_evaluated: bool = False
    oracle_path_length: int | None = None
    oracle_match: bool | None = None
    congested_after: bool | None = None
    generations_run: int = 0
    seed: int = 0
    config_digest: str = ""
    topology_digest: str = ""
    history: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["best_path"] = list(self.best_path)
        return d


def _replay_congestion(topology: Topology, path, seed: int, fraction: float) -> bool:
    """Redraw traffic once (half persistent, half fresh) and test the route."""
    rng = np.random.default_rng(derive_seed(seed, 2))
    fresh = rng.random(topology.node_count)
    for v in path:
        m = topology.metrics(v)
        load = 0.5 * m.traffic_load + 0.5 * fresh[v] * m.bandwidth
        if load > fraction * m.bandwidth:
            return True
    return False


def initial_population(paths, config: ga.GaConfig, rng) -> list[tuple[int, ...]]:
    """First generation: ``population_size`` enumerated paths drawn at random
    without replacement, kept in enumeration order; all of them if the cap
    is ``None`` or not smaller than the path count."""
    if config.population_size is None or config.population_size >= len(paths):
        return list(paths)
    pick = np.sort(rng.choice(len(paths), size=config.population_size, replace=False))
    return [paths[int(i)] for i in pick]


def run_once(
    topology: Topology,
    mode: str,
    config: RunConfig | None = None,
    seed: int = 0,
    kb: "KnowledgeBase | None" = None,
) -> RunReport:
    """Route ``topology`` in one mode.  Failures are recorded, not raised."""
    if mode not in MODES:
        raise InvalidConfig(f"mode must be one of {MODES}, got {mode!r}")
    config = config or RunConfig()
    gacfg = config.ga
    base = dict(
        mode=mode,
        total_nodes=topology.node_count,
        seed=seed,
        config_digest=config.digest(),
        topology_digest=topology_digest(topology),
    )
    try:
        sub = level1_select(topology, config.grading) if mode == "graded" else full_subgraph(topology)
    except Disconnected:
        return RunReport(status="disconnected", survivors=0, nodes_selected=0, **base)
    survivors = len(sub.surviving_nodes)
    try:
        paths = ga.enumerate_paths(sub, gacfg.max_paths, gacfg.max_hops)
    except NoRoute:
        return RunReport(status="no_route", survivors=survivors, nodes_selected=0, **base)

    bandwidth = topology.bandwidths()
    rng = np.random.default_rng(derive_seed(seed, 3))
    result = ga.evolve(initial_population(paths, gacfg, rng), gacfg, bandwidth, sub, rng)

    best = result.best
    report = ga.evaluate_fitness(result.population, bandwidth)
    best_idx = result.population.index(best)
    rep = RunReport(
        status="ok",
        survivors=survivors,
        nodes_selected=len({v for p in result.population for v in p}),
        best_path=best,
        route_length=len(best) - 1,
        report_fitness=float(report.report_fitness[best_idx]),
        bottleneck=float(report.bottlenecks[best_idx]),
        feasible=bool(report.bottlenecks[best_idx] >= gacfg.demand),
        generations_run=result.generations_run,
        congested_after=_replay_congestion(topology, best, seed, config.grading.congestion_fraction),
        history=[
            {
                "generation": h.generation,
                "best_report_fitness": h.best_report_fitness,
                "best_bottleneck": h.best_bottleneck,
                "max_bottleneck": h.max_bottleneck,
                "feasible": h.feasible,
            }
            for h in result.history
        ],
        **base,
    )
    if topology.node_count <= config.oracle_cap:
        ref = oracle_best_path(sub, bandwidth, gacfg.demand)
        rep.oracle_evaluated = True
        rep.oracle_path_length = len(ref) - 1
        rep.oracle_match = path_score(best, bandwidth, gacfg.demand) == path_score(ref, bandwidth, gacfg.demand)
    if kb is not None and mode == "graded":
        kb.record(
            KnowledgeBaseEntry(
                topology_digest=rep.topology_digest,
                source=topology.source,
                destination=topology.destination,
                best_path=tuple(best),
                bottleneck=rep.bottleneck,
            )
        )
    return rep


# -- sweep ---------------------------------------------------------------------------


AGGREGATE_COLUMNS = (
    "node_count",
    "mode",
    "runs",
    "failures",
    "mean_survivors",
    "mean_nodes_selected",
    "mean_route_length",
    "mean_report_fitness",
    "evaluated",
    "hits",
    "hit_rate",
    "reference_hit_rate",
    "congestion_rate",
    "base_seed",
    "config_digest",
)

RUN_COLUMNS = (
    "node_count",
    "run",
    "mode",
    "status",
    "seed",
    "survivors",
    "nodes_selected",
    "route_length",
    "report_fitness",
    "bottleneck",
    "feasible",
    "oracle_evaluated",
    "oracle_path_length",
    "oracle_match",
    "congested_after",
    "generations_run",
    "best_path",
    "topology_digest",
    "config_digest",
)


@dataclass
class SweepResult:
    config: RunConfig
    runs: list[tuple[int, int, RunReport]]
    aggregate: list[dict]


def _mean(values):
    return float(np.mean(values)) if values else None


def aggregate_reports(reports: Sequence[RunReport], node_count: int, mode: str, config: RunConfig) -> dict:
    ok = [r for r in reports if r.ok]
    evaluated = [r for r in ok if r.oracle_evaluated]
    hits = sum(1 for r in evaluated if r.oracle_match)
    return {
        "node_count": node_count,
        "mode": mode,
        "runs": len(reports),
        "failures": len(reports) - len(ok),
        "mean_survivors": _mean([r.survivors for r in ok]),
        "mean_nodes_selected": _mean([r.nodes_selected for r in ok]),
        "mean_route_length": _mean([r.route_length for r in ok]),
        "mean_report_fitness": _mean([r.report_fitness for r in ok]),
        "evaluated": len(evaluated),
        "hits": hits,
        "hit_rate": hit_rate(hits, len(evaluated)),
        "reference_hit_rate": REFERENCE_HIT_RATE[mode],
        "congestion_rate": _mean([float(r.congested_after) for r in ok]),
        "base_seed": config.sweep.base_seed,
        "config_digest": config.digest(),
    }


def hit_rate(hits: int, evaluated: int) -> float | None:
    return hits / evaluated if evaluated else None


def _sweep_cell(args):
    config, node_count, run = args
    seed = derive_seed(config.sweep.base_seed, node_count, run)
    topo = build_topology(replace(config.topology, node_count=node_count), seed)
    return [(node_count, run, run_once(topo, mode, config, seed)) for mode in MODES]


def run_sweep(config: RunConfig | None = None, kb: "KnowledgeBase | None" = None) -> SweepResult:
    """Run both modes on ``runs_per_count`` seeded topologies per node count."""
    config = config or RunConfig()
    jobs = [(config, n, r) for n in config.sweep.node_counts for r in range(config.sweep.runs_per_count)]
    if config.sweep.workers > 1:
        with ProcessPoolExecutor(config.sweep.workers) as pool:
            cells = list(pool.map(_sweep_cell, jobs))
    else:
        cells = [_sweep_cell(job) for job in jobs]
    runs = [row for cell in cells for row in cell]
    if kb is not None:
        for _, _, rep in runs:
            if rep.ok and rep.mode == "graded":
                kb.record(
                    KnowledgeBaseEntry(rep.topology_digest, rep.best_path[0], rep.best_path[-1],
                                       tuple(rep.best_path), rep.bottleneck)
                )
    aggregate = []
    for n in config.sweep.node_counts:
        for mode in MODES:
            reports = [rep for nc, _, rep in runs if nc == n and rep.mode == mode]
            aggregate.append(aggregate_reports(reports, n, mode, config))
    return SweepResult(config, runs, aggregate)


# -- output ---------------------------------------------------------------------------


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.6f}"
    if isinstance(value, (tuple, list)):
        return " ".join(str(v) for v in value)
    return str(value)


def _csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in columns])
    return buf.getvalue()


def aggregate_csv(result: SweepResult) -> str:
    return _csv(result.aggregate, AGGREGATE_COLUMNS)


def runs_csv(result: SweepResult) -> str:
    rows = []
    for n, run, rep in result.runs:
        row = rep.to_dict()
        row.update(node_count=n, run=run)
        rows.append(row)
    return _csv(rows, RUN_COLUMNS)


PLOT_COLUMNS = ("node_count", "graded_nodes_selected", "ungraded_nodes_selected", "base_seed", "config_digest")


def plot_data(result: SweepResult) -> dict[str, list]:
    """Node count against mean nodes selected, one series per mode."""
    series = {"node_count": list(result.config.sweep.node_counts)}
    for mode in MODES:
        by_n = {row["node_count"]: row["mean_nodes_selected"] for row in result.aggregate if row["mode"] == mode}
        series[mode] = [by_n[n] for n in series["node_count"]]
    return series


def plot_csv(result: SweepResult) -> str:
    data = plot_data(result)
    stamp = {"base_seed": result.config.sweep.base_seed, "config_digest": result.config.digest()}
    rows = [
        {"node_count": n, "graded_nodes_selected": g, "ungraded_nodes_selected": u, **stamp}
        for n, g, u in zip(data["node_count"], data["graded"], data["ungraded"])
    ]
    return _csv(rows, PLOT_COLUMNS)


def sweep_json(result: SweepResult) -> str:
    doc = {
        "config": result.config.to_dict(),
        "config_digest": result.config.digest(),
        "aggregate": result.aggregate,
        "plot": plot_data(result),
        "runs": [dict(rep.to_dict(), node_count=n, run=run) for n, run, rep in result.runs],
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


# -- knowledge base -------------------------------------------------------------------


@dataclass(frozen=True)
class KnowledgeBaseEntry:
    topology_digest: str
    source: int
    destination: int
    best_path: tuple[int, ...]
    bottleneck: float
    timestamp: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "best_path", tuple(self.best_path))
        p = self.best_path
        if len(p) < 2 or p[0] != self.source or p[-1] != self.destination or len(set(p)) != len(p):
            raise InvalidConfig(f"knowledge-base path {p} is not a loop-free source->destination path")


class KnowledgeBase:
    """Append-only JSON-lines store of good routes keyed by topology and endpoints."""

    def __init__(self, path, clock=time.time):
        self.path = Path(path)
        self.clock = clock

    def record(self, entry: KnowledgeBaseEntry) -> KnowledgeBaseEntry:
        if entry.timestamp is None:
            entry = replace(entry, timestamp=float(self.clock()))
        line = json.dumps(dict(asdict(entry), best_path=list(entry.best_path)), sort_keys=True)
        try:
            with self.path.open("a") as fh:
                fh.write(line + "\n")
        except OSError as exc:
            raise StorageError(f"cannot append to {self.path}: {exc}") from exc
        return entry

    def entries(self) -> list[KnowledgeBaseEntry]:
        if not self.path.exists():
            return []
        try:
            lines = self.path.read_text().splitlines()
        except OSError as exc:
            raise StorageError(f"cannot read {self.path}: {exc}") from exc
        return [KnowledgeBaseEntry(**json.loads(line)) for line in lines if line.strip()]

    def lookup(self, topology_digest: str, source: int, destination: int) -> KnowledgeBaseEntry | None:
        best = None
        for e in self.entries():
            if (e.topology_digest, e.source, e.destination) != (topology_digest, source, destination):
                continue
            if best is None or e.bottleneck > best.bottleneck:
                best = e
        return best
