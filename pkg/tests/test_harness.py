import json

import pytest

from conftest import complete_edges, make_topology
from gradedroute.errors import InvalidConfig, NoRoute, StorageError
from gradedroute.ga import GaConfig
from gradedroute.grading import GradingThresholds
from gradedroute.harness import (
    KnowledgeBase,
    KnowledgeBaseEntry,
    RunConfig,
    SweepParams,
    TopologyParams,
    aggregate_csv,
    build_topology,
    hit_rate,
    oracle_best_path,
    path_score,
    plot_data,
    run_once,
    run_sweep,
    runs_csv,
)
from gradedroute.netmodel import NodeMetrics, topology_digest


def diamond(bw1=50.0):
    return make_topology(
        [(0, 1), (1, 4), (0, 2), (2, 3), (3, 4)],
        bandwidth={0: 100, 1: bw1, 2: 90, 3: 90, 4: 100},
    )


def test_oracle_examples():
    topo = diamond()
    assert oracle_best_path(topo, topo.bandwidths(), 40) == (0, 1, 4)
    assert oracle_best_path(topo, topo.bandwidths(), 60) == (0, 2, 3, 4)
    # nothing meets the demand: widest wins
    assert oracle_best_path(topo, topo.bandwidths(), 95) == (0, 2, 3, 4)
    line = make_topology([(0, 1), (1, 2)])
    assert oracle_best_path(line, line.bandwidths(), 0) == (0, 1, 2)
    with pytest.raises(NoRoute):
        cut = make_topology([(1, 0), (1, 2)], n=3)
        oracle_best_path(cut, cut.bandwidths(), 0)


def test_path_score():
    bw = diamond().bandwidths()
    assert path_score((0, 1, 4), bw, 40) == (True, 2, 50)


def graded_fixture():
    # all nodes healthy, fixed delay threshold so grading is predictable
    healthy = NodeMetrics(bandwidth=80, network_lifetime=5, resource_allocated=True)
    return make_topology(complete_edges(4), metrics=[healthy] * 4)


def test_run_once_both_modes_find_two_hop_route():
    topo = make_topology(
        [(0, 1), (1, 3), (0, 2), (2, 3)],
        metrics=[NodeMetrics(bandwidth=80, network_lifetime=5, resource_allocated=True)] * 4,
    )
    cfg = RunConfig(grading=GradingThresholds(delay_threshold=1.0))
    for mode in ("graded", "ungraded"):
        rep = run_once(topo, mode, cfg, seed=1)
        assert rep.ok
        assert rep.route_length == 2
        assert rep.oracle_evaluated and rep.oracle_match


def test_run_once_records_disconnected():
    dead = NodeMetrics(bandwidth=80)
    ok = NodeMetrics(bandwidth=80, network_lifetime=5, resource_allocated=True)
    topo = make_topology([(0, 1), (1, 2)], metrics=[ok, dead, ok])
    rep = run_once(topo, "graded", RunConfig(grading=GradingThresholds(delay_threshold=1.0)), seed=0)
    assert rep.status == "disconnected"
    assert not rep.ok
    assert run_once(topo, "ungraded", seed=0).ok


def test_run_once_no_route():
    topo = make_topology([(1, 0), (1, 2)], n=3)
    assert run_once(topo, "ungraded", seed=0).status == "no_route"


def test_run_once_deterministic():
    topo = build_topology(TopologyParams(node_count=24), seed=5)
    a = run_once(topo, "graded", seed=9)
    b = run_once(topo, "graded", seed=9)
    assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)


def test_run_once_rejects_mode(k4):
    with pytest.raises(InvalidConfig):
        run_once(k4, "both")


def test_build_topology_deterministic():
    p = TopologyParams(node_count=40)
    assert topology_digest(build_topology(p, 3)) == topology_digest(build_topology(p, 3))
    assert topology_digest(build_topology(p, 3)) != topology_digest(build_topology(p, 4))


def test_config_round_trip_and_validation():
    cfg = RunConfig(ga=GaConfig(demand=25), sweep=SweepParams(node_counts=(4, 8)))
    again = RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg
    assert again.digest() == cfg.digest()
    with pytest.raises(InvalidConfig):
        RunConfig.from_dict({"bogus": {}})
    with pytest.raises(InvalidConfig):
        RunConfig.from_dict({"ga": {"demandd": 3}})


def test_sweep_one_row_per_mode():
    cfg = RunConfig(sweep=SweepParams(node_counts=(4,), runs_per_count=1))
    result = run_sweep(cfg)
    assert [(r["node_count"], r["mode"]) for r in result.aggregate] == [(4, "graded"), (4, "ungraded")]
    assert len(result.runs) == 2


def test_sweep_deterministic():
    cfg = RunConfig(sweep=SweepParams(node_counts=(8, 16), runs_per_count=3))
    a, b = run_sweep(cfg), run_sweep(cfg)
    assert aggregate_csv(a) == aggregate_csv(b)
    assert runs_csv(a) == runs_csv(b)
    plot = plot_data(a)
    assert plot["node_count"] == [8, 16]


def test_hit_rate():
    assert hit_rate(18, 20) == pytest.approx(0.90)
    assert hit_rate(0, 0) is None


def test_knowledge_base(tmp_path):
    kb = KnowledgeBase(tmp_path / "kb.jsonl", clock=lambda: 123.0)
    assert kb.lookup("abc", 0, 3) is None
    first = kb.record(KnowledgeBaseEntry("abc", 0, 3, (0, 1, 3), 40.0))
    assert first.timestamp == 123.0
    assert kb.lookup("abc", 0, 3) == first
    kb.record(KnowledgeBaseEntry("abc", 0, 3, (0, 2, 3), 70.0))
    kb.record(KnowledgeBaseEntry("abc", 0, 3, (0, 3), 55.0))
    assert kb.lookup("abc", 0, 3).bottleneck == 70.0
    assert kb.lookup("abc", 1, 3) is None
    assert len(kb.entries()) == 3


def test_knowledge_base_validation_and_io(tmp_path):
    with pytest.raises(InvalidConfig):
        KnowledgeBaseEntry("abc", 0, 3, (0, 1, 0, 3), 1.0)
    kb = KnowledgeBase(tmp_path / "missing" / "kb.jsonl")
    with pytest.raises(StorageError):
        kb.record(KnowledgeBaseEntry("abc", 0, 3, (0, 3), 1.0))


def test_graded_runs_feed_knowledge_base(tmp_path):
    kb = KnowledgeBase(tmp_path / "kb.jsonl")
    topo = build_topology(TopologyParams(node_count=16), seed=1)
    rep = run_once(topo, "graded", seed=2, kb=kb)
    run_once(topo, "ungraded", seed=2, kb=kb)
    if rep.ok:
        hit = kb.lookup(rep.topology_digest, topo.source, topo.destination)
        assert hit.best_path == rep.best_path
        assert len(kb.entries()) == 1
    else:
        assert kb.entries() == []
