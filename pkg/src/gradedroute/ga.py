"""Path-encoded genetic algorithm used for Level-2 route optimisation.

A chromosome is a tuple of node ids starting at the source and ending at
the destination with no repeats, and every consecutive pair must be an
arc of the working subgraph.  Fitness is driven by the path bottleneck,
the smallest node bandwidth along the path.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    BadCutPoint,
    DegenerateBandwidth,
    DuplicateNode,
    InvalidConfig,
    MutationRejected,
    NoRoute,
    NotPermutation,
)
from .grading import GradedSubgraph

Path = tuple[int, ...]


@dataclass(frozen=True)
class GaConfig:
    crossover_prob: float = 0.95
    mutation_prob: float = 0.05
    generations: int = 10
    # None: use every enumerated path
    population_size: int | None = 20
    elite_threshold: float = 0.9
    crossover_point: int = 4
    pmx_points: tuple[int, int] = (3, 5)
    demand: float = 30.0
    max_paths: int = 200
    max_hops: int | None = None
    seed: int | None = None

    def __post_init__(self):
        for name in ("crossover_prob", "mutation_prob"):
            p = getattr(self, name)
            if not 0 <= p <= 1:
                raise InvalidConfig(f"{name} must be in [0, 1], got {p}")
        if self.generations < 1:
            raise InvalidConfig("generations must be >= 1")
        if self.population_size is not None and self.population_size < 1:
            raise InvalidConfig("population_size must be >= 1")
        if self.max_paths < 1:
            raise InvalidConfig("max_paths must be >= 1")
        if self.demand < 0:
            raise InvalidConfig("demand must be non-negative")
        object.__setattr__(self, "pmx_points", tuple(self.pmx_points))


# -- paths --------------------------------------------------------------------


def is_valid_path(path: Sequence[int], subgraph: GradedSubgraph) -> bool:
    if len(path) < 2 or path[0] != subgraph.source or path[-1] != subgraph.destination:
        return False
    if len(set(path)) != len(path):
        return False
    return all(subgraph.has_edge(u, v) for u, v in zip(path, path[1:]))


def bottleneck(path: Sequence[int], bandwidth: Mapping[int, float]) -> float:
    return min(bandwidth[v] for v in path)


def _hops_to(subgraph: GradedSubgraph, target: int) -> dict[int, int]:
    pred: dict[int, list[int]] = {}
    for u, v in subgraph.induced_edges:
        pred.setdefault(v, []).append(u)
    dist = {target: 0}
    queue = deque([target])
    while queue:
        v = queue.popleft()
        for u in pred.get(v, ()):
            if u not in dist:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def enumerate_paths(
    subgraph: GradedSubgraph, max_paths: int = 200, max_hops: int | None = None
) -> list[Path]:
    """Simple source->destination paths, fewest hops first.

    Paths of equal length come out in lexicographic order.  Enumeration
    stops once ``max_paths`` paths are collected.
    """
    s, d = subgraph.source, subgraph.destination
    dist = _hops_to(subgraph, d)
    if s not in dist:
        raise NoRoute(f"no path from {s} to {d}")
    limit = len(subgraph.surviving_nodes) - 1
    if max_hops is not None:
        limit = min(limit, max_hops)
    succ = subgraph.successors
    found: list[Path] = []

    def extend(path: list[int], on_path: set[int], remaining: int):
        u = path[-1]
        if remaining == 0:
            if u == d:
                found.append(tuple(path))
            return
        if u == d:
            return
        for v in succ[u]:
            if v in on_path or dist.get(v, limit + 1) > remaining - 1:
                continue
            path.append(v)
            on_path.add(v)
            extend(path, on_path, remaining - 1)
            on_path.discard(v)
            path.pop()
            if len(found) >= max_paths:
                return

    for hops in range(dist[s], limit + 1):
        extend([s], {s}, hops)
        if len(found) >= max_paths:
            break
    if not found:
        raise NoRoute(f"no path from {s} to {d} within {limit} hops")
    return found[:max_paths]


def rank_key(path: Path, bn: float, demand: float):
    """Sort key, smaller is better.

    Paths meeting ``demand`` come first, shortest then widest; the rest are
    ordered widest then shortest.  Ties fall back to the node sequence.
    """
    if bn >= demand:
        return (0, len(path), -bn, path)
    return (1, -bn, len(path), path)


# -- fitness and selection ------------------------------------------------------


@dataclass(frozen=True)
class FitnessReport:
    selection_weights: np.ndarray
    report_fitness: np.ndarray
    bottlenecks: np.ndarray


def fitness_from_bottlenecks(bottlenecks: Sequence[float]) -> FitnessReport:
    b = np.asarray(bottlenecks, dtype=float)
    if b.size == 0:
        raise InvalidConfig("empty population")
    if np.any(b <= 0) or not np.all(np.isfinite(b)):
        raise DegenerateBandwidth(f"non-positive bottleneck in {b.tolist()}")
    return FitnessReport(b / b.sum(), b / b.max(), b)


def evaluate_fitness(population: Sequence[Path], bandwidth: Mapping[int, float]) -> FitnessReport:
    """Selection weight ``B_j / sum_i B_i`` and best-relative ``B_j / max B``."""
    return fitness_from_bottlenecks([bottleneck(p, bandwidth) for p in population])


def roulette_select(weights, rng) -> int:
    """Spin the wheel once.  ``weights`` may be a FitnessReport."""
    if isinstance(weights, FitnessReport):
        weights = weights.selection_weights
    cumulative = np.cumsum(weights)
    u = rng.random() * cumulative[-1]
    return min(int(np.searchsorted(cumulative, u, side="right")), len(cumulative) - 1)


# -- operators --------------------------------------------------------------------


def single_point_crossover(p1: Sequence[int], p2: Sequence[int], point: int, point2: int | None = None):
    """Swap tails at ``point`` (or at ``point`` in p1 and ``point2`` in p2).

    Output is raw: repeated genes are left for :func:`repair`.
    """
    q = point if point2 is None else point2
    if point2 is None and not 1 <= point < min(len(p1), len(p2)):
        raise BadCutPoint(f"cut {point} outside [1, {min(len(p1), len(p2))})")
    if not (1 <= point < len(p1) and 1 <= q < len(p2)):
        raise BadCutPoint(f"cuts ({point}, {q}) invalid for lengths {len(p1)}, {len(p2)}")
    return tuple(p1[:point]) + tuple(p2[q:]), tuple(p2[:q]) + tuple(p1[point:])


def _pmx_child(donor, receiver, a, b):
    # donor supplies the segment [a, b); receiver fills the rest
    child = [None] * len(donor)
    child[a:b] = donor[a:b]
    mapping = {donor[i]: receiver[i] for i in range(a, b)}
    segment = set(donor[a:b])
    for i in list(range(a)) + list(range(b, len(donor))):
        gene = receiver[i]
        while gene in segment:
            gene = mapping[gene]
        child[i] = gene
    return tuple(child)


def pmx_crossover(p1: Sequence[int], p2: Sequence[int], points: tuple[int, int]):
    """Partially mapped crossover exchanging the segment ``points[0]:points[1]``."""
    if len(p1) != len(p2) or sorted(p1) != sorted(p2) or len(set(p1)) != len(p1):
        raise NotPermutation("parents must be permutations of the same gene set")
    a, b = points
    if not 1 <= a < b <= len(p1):
        raise BadCutPoint(f"points {points} invalid for length {len(p1)}")
    return _pmx_child(p2, p1, a, b), _pmx_child(p1, p2, a, b)


def insertion_mutation(c: Path, node: int, position: int, subgraph: GradedSubgraph) -> Path:
    if node not in subgraph.surviving_nodes:
        raise MutationRejected(f"node {node} not in subgraph")
    if node in c:
        raise DuplicateNode(f"node {node} already on path")
    if not 1 <= position <= len(c) - 1:
        raise MutationRejected(f"position {position} would displace an endpoint")
    mutated = tuple(c[:position]) + (node,) + tuple(c[position:])
    if not is_valid_path(mutated, subgraph):
        raise MutationRejected(f"inserting {node} at {position} breaks adjacency")
    return mutated


def repair(raw: Sequence[int], subgraph: GradedSubgraph) -> Path | None:
    """Cut loops out of ``raw``; return ``None`` if the result is not a path."""
    genes = list(raw)
    while True:
        first_seen: dict[int, int] = {}
        for i, g in enumerate(genes):
            if g in first_seen:
                j = first_seen[g]
                genes = genes[: j + 1] + genes[i + 1 :]
                break
            first_seen[g] = i
        else:
            break
    path = tuple(genes)
    return path if is_valid_path(path, subgraph) else None


# -- generation loop ----------------------------------------------------------------


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best_path: Path
    best_report_fitness: float
    best_bottleneck: float
    max_bottleneck: float
    feasible: int


@dataclass
class EvolveResult:
    best: Path
    history: list[GenerationStats] = field(default_factory=list)
    population: list[Path] = field(default_factory=list)
    generations_run: int = 0


def _mate(p1: Path, p2: Path, config: GaConfig):
    if p1 != p2 and len(p1) == len(p2) and sorted(p1) == sorted(p2) and len(p1) >= 3:
        a, b = config.pmx_points
        a = min(max(a, 1), len(p1) - 2)
        b = min(max(b, a + 1), len(p1) - 1)
        return pmx_crossover(p1, p2, (a, b))
    common = set(p1[1:-1]) & set(p2[1:-1])
    if common:
        i = min((p1.index(g) for g in common), key=lambda k: (abs(k - config.crossover_point), k))
        return single_point_crossover(p1, p2, i, p2.index(p1[i]))
    return p1, p2


def _mutate(path: Path, subgraph: GradedSubgraph, rng, outside: list[int]) -> Path:
    candidates = [v for v in outside if v not in path]
    if not candidates:
        return path
    node = candidates[int(rng.integers(len(candidates)))]
    position = int(rng.integers(1, len(path)))
    try:
        return insertion_mutation(path, node, position, subgraph)
    except (MutationRejected, DuplicateNode):
        return path


def _stats(gen, pop, report, keys):
    best = min(range(len(pop)), key=keys.__getitem__)
    return GenerationStats(
        generation=gen,
        best_path=pop[best],
        best_report_fitness=float(report.report_fitness[best]),
        best_bottleneck=float(report.bottlenecks[best]),
        max_bottleneck=float(report.bottlenecks.max()),
        feasible=sum(1 for k in keys if k[0] == 0),
    )


def evolve(
    initial: Sequence[Path],
    config: GaConfig,
    bandwidth: Mapping[int, float],
    subgraph: GradedSubgraph,
    rng,
) -> EvolveResult:
    """Run the generation loop and return the best path found.

    Each generation keeps the best-ranked member and the widest member
    unchanged, then carries forward members whose best-relative fitness
    exceeds ``elite_threshold``, then fills up with roulette-selected
    offspring.  Stops after ``config.generations`` generations or as soon as
    every member meets ``config.demand``.
    """
    pop = [tuple(p) for p in initial]
    if not pop:
        raise NoRoute("empty initial population")
    for p in pop:
        if not is_valid_path(p, subgraph):
            raise InvalidConfig(f"initial member {p} is not a valid path")
    n = len(pop)
    outside = sorted(subgraph.surviving_nodes)
    history: list[GenerationStats] = []
    generations_run = 0

    for gen in range(config.generations):
        report = evaluate_fitness(pop, bandwidth)
        keys = [rank_key(p, b, config.demand) for p, b in zip(pop, report.bottlenecks)]
        history.append(_stats(gen, pop, report, keys))
        if all(b >= config.demand for b in report.bottlenecks):
            break

        order = sorted(range(n), key=keys.__getitem__)
        widest = max(order, key=lambda k: report.bottlenecks[k])
        nxt = [pop[order[0]]]
        if pop[widest] != nxt[0]:
            nxt.append(pop[widest])
        for k in order:
            if len(nxt) >= n:
                break
            if report.report_fitness[k] > config.elite_threshold and pop[k] not in nxt:
                nxt.append(pop[k])

        while len(nxt) < n:
            i = roulette_select(report, rng)
            j = roulette_select(report, rng)
            p1, p2 = pop[i], pop[j]
            fitter = p1 if keys[i] <= keys[j] else p2
            if rng.random() < config.crossover_prob:
                raw = _mate(p1, p2, config)
            else:
                raw = (p1, p2)
            for r in raw:
                child = repair(r, subgraph) or fitter
                if rng.random() < config.mutation_prob:
                    child = _mutate(child, subgraph, rng, outside)
                if len(nxt) < n:
                    nxt.append(child)
        pop = nxt
        generations_run += 1

    report = evaluate_fitness(pop, bandwidth)
    keys = [rank_key(p, b, config.demand) for p, b in zip(pop, report.bottlenecks)]
    if generations_run == len(history):
        history.append(_stats(generations_run, pop, report, keys))
    best = min(range(n), key=keys.__getitem__)
    return EvolveResult(pop[best], history, pop, generations_run)
