import pytest

from gradedroute.netmodel import Edge, Node, NodeMetrics, Topology

# Criterion lines collected by test_acceptance and echoed in the summary.
ACCEPTANCE_LINES: list[str] = []


def make_topology(edges, n=None, *, source=0, destination=None, bandwidth=None, metrics=None, regions=None):
    """Small hand-built topology; ``bandwidth`` maps node -> bandwidth."""
    n = n if n is not None else 1 + max(max(e) for e in edges)
    destination = n - 1 if destination is None else destination
    nodes = []
    for i in range(n):
        if metrics is not None:
            m = metrics[i]
        else:
            bw = (bandwidth or {}).get(i, 100.0)
            m = NodeMetrics(bandwidth=bw, network_lifetime=5, resource_allocated=True)
        nodes.append(Node(i, 0 if regions is None else regions[i], m))
    return Topology(
        tuple(nodes),
        tuple(Edge(u, v, 10.0) for u, v in edges),
        source,
        destination,
    )


def complete_edges(n):
    return [(u, v) for u in range(n) for v in range(n) if u != v]


@pytest.fixture
def k4():
    return make_topology(complete_edges(4))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
