"""Acceptance criteria, one test each.

Every test appends a ``PASS``/``FAIL`` line that is echoed in the pytest
terminal summary, so ``pytest -v`` output carries a per-criterion verdict.
"""
import itertools
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from gradedroute.cli import main
from gradedroute.errors import Disconnected
from gradedroute.ga import GaConfig, enumerate_paths, evaluate_fitness, evolve, pmx_crossover, roulette_select, single_point_crossover
from gradedroute.grading import GradingThresholds, level1_select, priority_of
from gradedroute.harness import (
    REFERENCE_HIT_RATE,
    RunConfig,
    TopologyParams,
    build_topology,
    oracle_best_path,
    path_score,
    run_sweep,
)
from gradedroute.netmodel import NodeMetrics
from gradedroute.queueing import FlowModel, QueueParams, mm1_mean, network_delay

TREND_COUNTS = (32, 64, 128, 256)
SWEEP_BUDGET_S = 300.0


def verdict(number: int, title: str, passed: bool, detail: str = "") -> None:
    line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}: {title}"
    if detail:
        line += f" [{detail}]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


@pytest.fixture(scope="module")
def default_sweep():
    start = time.perf_counter()
    result = run_sweep(RunConfig())
    return result, time.perf_counter() - start


def test_c01_golden_single_point_crossover():
    o1, o2 = single_point_crossover((1, 2, 3, 4, 5, 6, 7), (1, 3, 4, 6, 2, 5, 7), 4)
    ok = o1 == (1, 2, 3, 4, 2, 5, 7) and o2 == (1, 3, 4, 6, 5, 6, 7)
    verdict(1, "golden single-point crossover", ok, f"o1={o1} o2={o2}")


def test_c02_queueing_formulas():
    _, printed = mm1_mean(QueueParams(rho=0.5, lam=1.0))
    t = network_delay(FlowModel([2.0], [5.0], mu=1.0, gamma=2.0))
    ok = abs(printed - 1.0) <= 1e-12 and abs(t - 1 / 3) <= 1e-12
    verdict(2, "M/M/1 mean and network delay within 1e-12", ok, f"mm1={printed!r} T={t!r}")


def _nested_oracle(alive, sparse, calm, resourced, prompt):
    if alive:
        if sparse:
            if calm:
                if resourced:
                    if prompt:
                        return 1
                    return 2
                return 3
            return 4
        return 5
    return 6


def test_c03_priority_truth_table():
    th = GradingThresholds(delay_threshold=1.0)
    mismatches = []
    for bits in itertools.product((False, True), repeat=5):
        alive, sparse, calm, resourced, prompt = bits
        m = NodeMetrics(
            bandwidth=100.0,
            network_lifetime=4 if alive else 0,
            node_density=2 if sparse else 6,
            traffic_load=10.0 if calm else 95.0,
            resource_allocated=resourced,
            delay=0.5 if prompt else 3.0,
        )
        if priority_of(m, th) != _nested_oracle(*bits):
            mismatches.append(bits)
    verdict(3, "priority model over all 32 metric combinations", not mismatches, f"mismatches={len(mismatches)}")


def test_c04_selection_weight_normalisation():
    rng = np.random.default_rng(4)
    worst = 0.0
    in_range = True
    for _ in range(1000):
        size = int(rng.integers(1, 40))
        bw = {v: float(rng.uniform(1e-3, 1e3)) for v in range(12)}
        pop = [(0, int(rng.integers(1, 11)), 11) for _ in range(size)]
        w = evaluate_fitness(pop, bw).selection_weights
        in_range &= bool(np.all((w >= 0) & (w <= 1)))
        worst = max(worst, abs(float(w.sum()) - 1.0))
    verdict(4, "selection weights in [0,1] summing to 1 over 1000 populations", in_range and worst <= 1e-9, f"max |sum-1|={worst:.2e}")


def test_c05_roulette_statistics():
    rng = np.random.default_rng(5)
    weights = np.array([0.25, 0.75])
    counts = np.bincount([roulette_select(weights, rng) for _ in range(100_000)], minlength=2)
    freq = counts / counts.sum()
    ok = bool(np.all(np.abs(freq - weights) <= 0.01))
    verdict(5, "roulette frequencies within 0.01 over 100000 draws", ok, f"freq={freq.round(4).tolist()}")


def test_c06_oracle_equivalence():
    cfg = GaConfig(population_size=None, max_paths=1_000_000)
    th = GradingThresholds()
    matched = evaluated = attempts = 0
    start = time.perf_counter()
    while evaluated < 100:
        n = 4 + attempts % 7
        topo = build_topology(TopologyParams(node_count=n), seed=600 + attempts)
        attempts += 1
        try:
            sub = level1_select(topo, th)
        except Disconnected:
            continue
        bw = topo.bandwidths()
        result = evolve(enumerate_paths(sub, cfg.max_paths), cfg, bw, sub, np.random.default_rng(attempts))
        ref = oracle_best_path(sub, bw, cfg.demand)
        evaluated += 1
        matched += path_score(result.best, bw, cfg.demand) == path_score(ref, bw, cfg.demand)
    elapsed = time.perf_counter() - start
    ok = matched == evaluated and elapsed < 10.0
    verdict(6, "graded evolve matches oracle on 100 topologies of <=10 nodes", ok, f"{matched}/{evaluated} in {elapsed:.2f}s")


def test_c07_selection_and_length_trend(default_sweep):
    result, _ = default_sweep
    rows = {(r["node_count"], r["mode"]): r for r in result.aggregate}
    failures = []
    parts = []
    for n in TREND_COUNTS:
        g, u = rows[(n, "graded")], rows[(n, "ungraded")]
        sel_ok = g["mean_nodes_selected"] <= u["mean_nodes_selected"]
        len_ok = g["mean_route_length"] <= u["mean_route_length"] + 1
        parts.append(
            f"n={n}: selected {g['mean_nodes_selected']:.2f}/{u['mean_nodes_selected']:.2f} "
            f"length {g['mean_route_length']:.2f}/{u['mean_route_length']:.2f}"
        )
        if not (sel_ok and len_ok):
            failures.append(n)
    verdict(7, "graded selects no more nodes, route within 1 hop", not failures, "; ".join(parts) + f"; failing n={failures}")


def test_c08_hit_rate_trend(default_sweep):
    result, _ = default_sweep
    hits = {"graded": [0, 0], "ungraded": [0, 0]}
    for _, _, rep in result.runs:
        if rep.ok and rep.oracle_evaluated:
            hits[rep.mode][0] += int(bool(rep.oracle_match))
            hits[rep.mode][1] += 1
    rate = {m: h / e if e else float("nan") for m, (h, e) in hits.items()}
    ok = all(e > 0 for _, e in hits.values()) and rate["graded"] >= rate["ungraded"]
    detail = ", ".join(
        f"{m} {hits[m][0]}/{hits[m][1]}={rate[m]:.3f} (reference {REFERENCE_HIT_RATE[m]:.2f})" for m in ("graded", "ungraded")
    )
    verdict(8, "shortest-path hit rate graded >= ungraded", ok, detail)


def test_c09_compare_is_deterministic(tmp_path):
    outputs = []
    for name in ("a", "b"):
        out = tmp_path / name / "cmp.csv"
        out.parent.mkdir()
        assert main(["compare", "--nodes", "4,8,16,32", "--runs", "5", "--seed", "77", "-o", str(out)]) == 0
        outputs.append([out.read_bytes(), out.with_suffix(".plot.csv").read_bytes(), out.with_suffix(".runs.csv").read_bytes()])
    verdict(9, "compare twice yields byte-identical CSVs", outputs[0] == outputs[1])


def test_c10_pmx_properties():
    rng = np.random.default_rng(10)
    bad = 0
    for _ in range(1000):
        n = int(rng.integers(5, 13))
        p1 = tuple(int(v) for v in rng.permutation(n))
        p2 = tuple(int(v) for v in rng.permutation(n))
        a = int(rng.integers(1, n))
        b = int(rng.integers(a + 1, n + 1))
        o1, o2 = pmx_crossover(p1, p2, (a, b))
        bad += sorted(o1) != sorted(p1) or sorted(o2) != sorted(p1)
        bad += pmx_crossover(p1, p1, (a, b)) != (p1, p1)
    verdict(10, "PMX closure and identity over 1000 pairs", bad == 0, f"violations={bad}")


def test_c11_full_sweep_runtime(default_sweep):
    result, elapsed = default_sweep
    cfg = result.config
    cells = len(cfg.sweep.node_counts) * cfg.sweep.runs_per_count * 2
    ok = len(result.runs) == cells and elapsed < SWEEP_BUDGET_S
    verdict(11, "full default sweep under 5 minutes", ok, f"{cells} runs in {elapsed:.1f}s")
