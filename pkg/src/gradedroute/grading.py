"""Node priority classes, grades, and the region-wise Level-1 filter."""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable

from .errors import Disconnected, InvalidConfig
from .netmodel import NodeMetrics, Topology, reachable
from .queueing import congestion_exists, median_delay

# Priority class -> grade.  Negative grades are non-production nodes.
GRADE_OF_PRIORITY = {1: 0, 2: 1, 3: -1, 4: -2, 5: 2, 6: -3}

TOP_CLASSES = 3
STEP2_WINDOW = (-2, 2)
STEP3_WINDOW = (0, 2)


@dataclass(frozen=True)
class GradingThresholds:
    """Cut-offs for the priority tests.

    ``delay_threshold=None`` means "median node delay of the topology" and
    is turned into a number by :meth:`resolve`.
    """

    density_cutoff: int = 5
    congestion_fraction: float = 0.8
    delay_threshold: float | None = None
    lifetime_threshold: float = 0.0

    def __post_init__(self):
        if not 0 < self.congestion_fraction <= 1:
            raise InvalidConfig("congestion_fraction must be in (0, 1]")
        if self.delay_threshold is not None and self.delay_threshold < 0:
            raise InvalidConfig("delay_threshold must be non-negative")

    def resolve(self, topology: Topology) -> "GradingThresholds":
        if self.delay_threshold is not None:
            return self
        return replace(self, delay_threshold=median_delay(topology))


def priority_tests(metrics: NodeMetrics, thresholds: GradingThresholds) -> tuple[bool, ...]:
    """The five checks in evaluation order: alive, sparse, uncongested,
    resourced, undelayed."""
    if thresholds.delay_threshold is None:
        raise InvalidConfig("delay_threshold unresolved; call GradingThresholds.resolve first")
    return (
        metrics.network_lifetime > thresholds.lifetime_threshold,
        metrics.node_density < thresholds.density_cutoff,
        not congestion_exists(metrics, thresholds.congestion_fraction),
        metrics.resource_allocated,
        not metrics.delay > thresholds.delay_threshold,
    )


def priority_of(metrics: NodeMetrics, thresholds: GradingThresholds) -> int:
    """Priority class 1 (best) .. 6 from the nested node checks.

    The first failing check decides the class: lifetime -> 6, density -> 5,
    congestion -> 4, resources -> 3, delay -> 2.
    """
    for depth, ok in enumerate(priority_tests(metrics, thresholds)):
        if not ok:
            return 6 - depth
    return 1


def grade_of(priority: int) -> int:
    try:
        return GRADE_OF_PRIORITY[priority]
    except KeyError:
        raise InvalidConfig(f"priority must be in 1..6, got {priority}") from None


@dataclass(frozen=True)
class GradedSubgraph:
    surviving_nodes: frozenset[int]
    induced_edges: tuple[tuple[int, int], ...]
    source: int
    destination: int

    @cached_property
    def successors(self) -> dict[int, tuple[int, ...]]:
        succ: dict[int, list[int]] = {v: [] for v in self.surviving_nodes}
        for u, v in self.induced_edges:
            succ[u].append(v)
        return {k: tuple(sorted(v)) for k, v in succ.items()}

    @cached_property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.induced_edges)

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self.edge_set


def induced_subgraph(topology: Topology, nodes: Iterable[int]) -> GradedSubgraph:
    keep = frozenset(nodes) | {topology.source, topology.destination}
    edges = tuple((e.src, e.dst) for e in topology.edges if e.src in keep and e.dst in keep)
    return GradedSubgraph(keep, edges, topology.source, topology.destination)


def full_subgraph(topology: Topology) -> GradedSubgraph:
    """The whole topology wrapped as a subgraph (ungraded routing)."""
    return induced_subgraph(topology, range(topology.node_count))


def _in_window(grade: int, window: tuple[int, int]) -> bool:
    return window[0] <= grade <= window[1]


def select_region(priorities: dict[int, int]) -> set[int]:
    """Level-1 steps 1-3 for one region; ``priorities`` maps node -> class."""
    best = sorted(set(priorities.values()))[:TOP_CLASSES]
    kept = {v for v, p in priorities.items() if p in best}
    kept = {v for v in kept if _in_window(grade_of(priorities[v]), STEP2_WINDOW)}
    return {v for v in kept if _in_window(grade_of(priorities[v]), STEP3_WINDOW)}


def level1_select(
    topology: Topology,
    thresholds: GradingThresholds | None = None,
    nodes: Iterable[int] | None = None,
) -> GradedSubgraph:
    """Filter nodes region by region and return the induced survivor graph.

    Source and destination are always retained and take no part in ranking
    the priority classes of their region.  ``nodes`` restricts the
    candidate set (used to re-apply the filter to an earlier result).

    Raises :class:`Disconnected` if the destination is unreachable from the
    source over surviving nodes.
    """
    th = (thresholds or GradingThresholds()).resolve(topology)
    candidates = set(range(topology.node_count)) if nodes is None else set(nodes)
    endpoints = {topology.source, topology.destination}

    by_region: dict[int, dict[int, int]] = {}
    for node in topology.nodes:
        if node.id in candidates and node.id not in endpoints:
            by_region.setdefault(node.region, {})[node.id] = priority_of(node.metrics, th)

    survivors: set[int] = set()
    for priorities in by_region.values():
        survivors |= select_region(priorities)

    sub = induced_subgraph(topology, survivors)
    if not reachable(sub.successors, sub.source, sub.destination):
        raise Disconnected(
            f"destination {sub.destination} unreachable from {sub.source} "
            f"over {len(sub.surviving_nodes)} surviving nodes"
        )
    return sub


def priorities(topology: Topology, thresholds: GradingThresholds | None = None) -> dict[int, int]:
    th = (thresholds or GradingThresholds()).resolve(topology)
    return {node.id: priority_of(node.metrics, th) for node in topology.nodes}
