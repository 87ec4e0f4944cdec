"""Shared graph builders plus the acceptance summary section."""
from __future__ import annotations

import random

from privavg.topology import Topology

# filled by tests/test_acceptance.py; printed after the run so the pass/fail
# line per criterion survives output capture
ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)


def triangle() -> Topology:
    return Topology(3, [(1, 2), (2, 3), (1, 3)])


def path3() -> Topology:
    return Topology(3, [(1, 2), (2, 3)])


def ten_node_three_separators() -> Topology:
    """Ten-vertex ring with one chord; deleting {3, 5, 10} strands {1,2}, {4}, {6,7,8,9}."""
    ring = [(i, i + 1) for i in range(1, 10)] + [(1, 10)]
    return Topology(10, ring + [(6, 9)])


def random_connected_topology(rnd: random.Random, n: int) -> Topology:
    """Uniform-ish connected graph: a random spanning tree plus a random set of extras."""
    if n == 1:
        return Topology(1, [])
    order = list(range(1, n + 1))
    rnd.shuffle(order)
    edges = set()
    for idx in range(1, n):
        a = order[idx]
        b = order[rnd.randrange(idx)]
        edges.add((min(a, b), max(a, b)))
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if (i, j) not in edges and rnd.random() < 0.3:
                edges.add((i, j))
    return Topology(n, sorted(edges))
