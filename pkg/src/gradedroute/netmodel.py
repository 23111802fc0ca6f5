"""Region-based random topologies and per-node attribute assignment.

Nodes are split round-robin into regions.  Consecutive regions are joined
by a few random links in each direction and every region is wired as a
strongly connected random digraph: a random Hamiltonian cycle, topped up
with random in-arcs until each node has ``round(density * (size - 1))``
incoming arcs.  Fixing the in-degree (rather than drawing each arc
independently) keeps node density, which the grading stage tests against
a hard cut-off, from spreading with region size.
"""
from __future__ import annotations

import hashlib
import json
import math
from collections import deque
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import GenerationFailed, InvalidConfig, UnknownNode

DEFAULT_BANDWIDTH_RANGE = (10.0, 100.0)
DEFAULT_LIFETIME_RANGE = (0, 10)
MAX_RETRIES = 100


@dataclass(frozen=True)
class NodeMetrics:
    bandwidth: float = 1.0
    network_lifetime: float = 0.0
    resource_allocated: bool = False
    node_density: int = 0
    traffic_load: float = 0.0
    delay: float = 0.0

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise InvalidConfig(f"bandwidth must be positive, got {self.bandwidth}")
        if self.node_density < 0:
            raise InvalidConfig("node_density must be non-negative")
        if not (self.traffic_load >= 0 and math.isfinite(self.traffic_load)):
            raise InvalidConfig(f"bad traffic_load {self.traffic_load}")
        # inf marks a saturated outgoing channel (see queueing.node_delay)
        if not self.delay >= 0:
            raise InvalidConfig(f"bad delay {self.delay}")


@dataclass(frozen=True)
class Node:
    id: int
    region: int
    metrics: NodeMetrics = field(default_factory=NodeMetrics)


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    capacity: float


@dataclass(frozen=True)
class Topology:
    """Immutable directed topology.  ``nodes[i].id == i`` always holds."""

    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    source: int
    destination: int
    seed: int | None = None

    def __post_init__(self):
        n = len(self.nodes)
        for i, node in enumerate(self.nodes):
            if node.id != i:
                raise InvalidConfig(f"node at position {i} has id {node.id}")
        seen = set()
        for e in self.edges:
            if e.src == e.dst:
                raise InvalidConfig(f"self-loop on node {e.src}")
            if not (0 <= e.src < n and 0 <= e.dst < n):
                raise InvalidConfig(f"edge {e.src}->{e.dst} references unknown node")
            if (e.src, e.dst) in seen:
                raise InvalidConfig(f"duplicate edge {e.src}->{e.dst}")
            if not e.capacity > 0:
                raise InvalidConfig(f"edge {e.src}->{e.dst} has capacity {e.capacity}")
            seen.add((e.src, e.dst))
        if not (0 <= self.source < n and 0 <= self.destination < n):
            raise InvalidConfig("source/destination out of range")
        if self.source == self.destination:
            raise InvalidConfig("source and destination must differ")

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def region_count(self) -> int:
        return len({node.region for node in self.nodes})

    @cached_property
    def successors(self) -> dict[int, tuple[int, ...]]:
        succ: dict[int, list[int]] = {node.id: [] for node in self.nodes}
        for e in self.edges:
            succ[e.src].append(e.dst)
        return {k: tuple(sorted(v)) for k, v in succ.items()}

    @cached_property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset((e.src, e.dst) for e in self.edges)

    def metrics(self, node: int) -> NodeMetrics:
        return self.nodes[node].metrics

    def bandwidths(self) -> dict[int, float]:
        return {node.id: node.metrics.bandwidth for node in self.nodes}

    def regions(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for node in self.nodes:
            out.setdefault(node.region, []).append(node.id)
        return out

    def with_metrics(self, metrics: list[NodeMetrics] | tuple[NodeMetrics, ...]) -> "Topology":
        nodes = tuple(replace(node, metrics=m) for node, m in zip(self.nodes, metrics, strict=True))
        return replace(self, nodes=nodes)


def in_degree(topology: Topology, node: int) -> int:
    if not 0 <= node < topology.node_count:
        raise UnknownNode(node)
    return sum(1 for e in topology.edges if e.dst == node)


def reachable(successors: dict[int, tuple[int, ...]], source: int, target: int) -> bool:
    seen = {source}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        if u == target:
            return True
        for v in successors.get(u, ()):
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return False


def _check_range(name, lo_hi, positive=False):
    try:
        lo, hi = lo_hi
    except (TypeError, ValueError):
        raise InvalidConfig(f"{name} must be a (min, max) pair") from None
    if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
        raise InvalidConfig(f"{name} must satisfy min < max, got {lo_hi}")
    if positive and lo <= 0:
        raise InvalidConfig(f"{name} minimum must be positive")
    if lo < 0:
        raise InvalidConfig(f"{name} must be non-negative")
    return lo, hi


def _default_endpoints(regions: dict[int, list[int]]) -> tuple[int, int]:
    first = regions[min(regions)]
    last = regions[max(regions)]
    source = min(first)
    candidates = [v for v in sorted(last) if v != source]
    return source, candidates[0]


def _wire_once(rng, members_by_region, edge_density, inter_link_fraction):
    arcs: set[tuple[int, int]] = set()
    indeg: dict[int, int] = {}

    def add(u, v):
        arcs.add((u, v))
        indeg[v] = indeg.get(v, 0) + 1

    for members in members_by_region:
        if len(members) < 2:
            continue
        order = [int(v) for v in rng.permutation(members)]
        for a, b in zip(order, order[1:] + order[:1]):
            add(a, b)
    for r in range(len(members_by_region) - 1):
        a, b = members_by_region[r], members_by_region[r + 1]
        links = max(1, round(inter_link_fraction * min(len(a), len(b))))
        for left, right in ((a, b), (b, a)):
            # distinct heads so no node collects more than one inter-region arc
            heads = rng.choice(right, size=min(links, len(right)), replace=False)
            for v in heads:
                add(int(left[int(rng.integers(len(left)))]), int(v))
    for members in members_by_region:
        k = max(1, round(edge_density * (len(members) - 1)))
        for v in members:
            need = k - indeg.get(v, 0)
            if need <= 0:
                continue
            pool = [u for u in members if u != v and (u, v) not in arcs]
            for i in rng.choice(len(pool), size=min(need, len(pool)), replace=False):
                add(pool[int(i)], v)
    return sorted(arcs)


def generate_topology(
    node_count: int,
    region_count: int,
    edge_density: float,
    seed: int,
    capacity_range: tuple[float, float] = DEFAULT_BANDWIDTH_RANGE,
    source: int | None = None,
    destination: int | None = None,
    max_retries: int = MAX_RETRIES,
    inter_link_fraction: float | None = None,
) -> Topology:
    """Build a seeded region-clustered digraph.

    Each pair of consecutive regions gets
    ``max(1, round(inter_link_fraction * smaller_region_size))`` random
    links in each direction; the fraction defaults to ``edge_density / 2``.

    Node metrics are placeholders except ``node_density``; call
    :func:`assign_attributes` to populate the rest.
    """
    if node_count < 2:
        raise InvalidConfig(f"node_count must be >= 2, got {node_count}")
    if region_count < 1 or region_count > node_count:
        raise InvalidConfig(f"region_count must be in [1, node_count], got {region_count}")
    if not 0 < edge_density <= 1:
        raise InvalidConfig(f"edge_density must be in (0, 1], got {edge_density}")
    _check_range("capacity_range", capacity_range, positive=True)
    if inter_link_fraction is None:
        inter_link_fraction = edge_density / 2
    if not 0 <= inter_link_fraction <= 1:
        raise InvalidConfig(f"inter_link_fraction must be in [0, 1], got {inter_link_fraction}")

    members_by_region = [list(range(r, node_count, region_count)) for r in range(region_count)]
    regions = {r: m for r, m in enumerate(members_by_region)}
    default_src, default_dst = _default_endpoints(regions)
    source = default_src if source is None else source
    destination = default_dst if destination is None else destination
    for v in (source, destination):
        if not 0 <= v < node_count:
            raise InvalidConfig(f"endpoint {v} outside [0, {node_count})")
    if source == destination:
        raise InvalidConfig("source and destination must differ")

    rng = np.random.default_rng(seed)
    for attempt in range(max_retries + 1):
        arcs = _wire_once(rng, members_by_region, edge_density, inter_link_fraction)
        succ: dict[int, list[int]] = {}
        for u, v in arcs:
            succ.setdefault(u, []).append(v)
        if reachable(succ, source, destination):
            break
    else:
        raise GenerationFailed("no source->destination path", retries=max_retries)

    caps = rng.uniform(capacity_range[0], capacity_range[1], size=len(arcs))
    edges = tuple(Edge(u, v, float(c)) for (u, v), c in zip(arcs, caps))
    indeg = np.zeros(node_count, dtype=int)
    for u, v in arcs:
        indeg[v] += 1
    nodes = tuple(
        Node(i, i % region_count, NodeMetrics(node_density=int(indeg[i])))
        for i in range(node_count)
    )
    return Topology(nodes, edges, source, destination, seed)


def assign_attributes(
    topology: Topology,
    seed: int,
    bandwidth_range: tuple[float, float] = DEFAULT_BANDWIDTH_RANGE,
    lifetime_range: tuple[int, int] = DEFAULT_LIFETIME_RANGE,
    resource_probability: float = 0.8,
    utilisation_range: tuple[float, float] = (0.0, 1.0),
) -> Topology:
    """Draw bandwidth, lifetime, resource flag and traffic for every node.

    Lifetime is an integer drawn from the inclusive ``lifetime_range`` so a
    lower bound of 0 yields some exhausted nodes.  Traffic load is the
    node's bandwidth times a utilisation drawn from ``utilisation_range``.
    ``delay`` is reset to 0; :func:`gradedroute.queueing.annotate_delays`
    fills it in.
    """
    b_lo, b_hi = _check_range("bandwidth_range", bandwidth_range, positive=True)
    l_lo, l_hi = _check_range("lifetime_range", lifetime_range)
    if not 0 <= resource_probability <= 1:
        raise InvalidConfig("resource_probability must be in [0, 1]")
    u_lo, u_hi = _check_range("utilisation_range", utilisation_range)

    n = topology.node_count
    rng = np.random.default_rng(seed)
    bandwidth = rng.uniform(b_lo, b_hi, size=n)
    lifetime = rng.integers(int(l_lo), int(l_hi) + 1, size=n)
    ra = rng.random(n) < resource_probability
    utilisation = rng.uniform(u_lo, u_hi, size=n)

    indeg = np.zeros(n, dtype=int)
    for e in topology.edges:
        indeg[e.dst] += 1
    metrics = [
        NodeMetrics(
            bandwidth=float(bandwidth[i]),
            network_lifetime=float(lifetime[i]),
            resource_allocated=bool(ra[i]),
            node_density=int(indeg[i]),
            traffic_load=float(utilisation[i] * bandwidth[i]),
            delay=0.0,
        )
        for i in range(n)
    ]
    return topology.with_metrics(metrics)


# -- serialisation -----------------------------------------------------------


def _encode_float(x: float):
    return None if math.isinf(x) else x


def topology_to_dict(topology: Topology) -> dict:
    nodes = []
    for node in topology.nodes:
        m = asdict(node.metrics)
        m["delay"] = _encode_float(m["delay"])
        nodes.append({"id": node.id, "region": node.region, "metrics": m})
    return {
        "nodes": nodes,
        "edges": [{"from": e.src, "to": e.dst, "capacity": e.capacity} for e in topology.edges],
        "source": topology.source,
        "destination": topology.destination,
        "seed": topology.seed,
    }


def topology_from_dict(data: dict) -> Topology:
    try:
        nodes = []
        for raw in sorted(data["nodes"], key=lambda d: d["id"]):
            m = dict(raw["metrics"])
            if m.get("delay") is None:
                m["delay"] = math.inf
            nodes.append(Node(int(raw["id"]), int(raw["region"]), NodeMetrics(**m)))
        edges = tuple(Edge(int(e["from"]), int(e["to"]), float(e["capacity"])) for e in data["edges"])
        return Topology(tuple(nodes), edges, int(data["source"]), int(data["destination"]), data.get("seed"))
    except (KeyError, TypeError) as exc:
        raise InvalidConfig(f"malformed topology document: {exc!r}") from exc


def dumps_topology(topology: Topology) -> str:
    return json.dumps(topology_to_dict(topology), indent=1, sort_keys=True) + "\n"


def save_topology(topology: Topology, path) -> None:
    Path(path).write_text(dumps_topology(topology))


def load_topology(path) -> Topology:
    return topology_from_dict(json.loads(Path(path).read_text()))


def topology_digest(topology: Topology) -> str:
    canon = json.dumps(topology_to_dict(topology), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
