import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from mbsmp.graph import Instance, LabeledDigraph, ScenarioSet  # noqa: E402
from mbsmp.io import load_instance  # noqa: E402

DATA = os.path.join(os.path.dirname(__file__), "data")


def data_path(name):
    return os.path.join(DATA, name)


@pytest.fixture
def figure1():
    return load_instance(data_path("figure1.txt"))


@pytest.fixture
def figure3():
    return load_instance(data_path("figure3.txt"))


@pytest.fixture
def chain3():
    return load_instance(data_path("chain3.txt"))


def random_instance(seed, n=12, arcs=30, labels=5, scenarios=3, seeds=2, budget=2,
                    p_live=0.6, unblockable=True, costs=None):
    """Small random labeled instance with a seeded numpy generator."""
    rng = np.random.default_rng(seed)
    triples = set()
    while len(triples) < arcs:
        t, h = rng.choice(n, 2, replace=False)
        triples.add((int(t), int(h), int(rng.integers(labels))))
    graph = LabeledDigraph.from_arcs(n, sorted(triples), labels)
    live = tuple(np.flatnonzero(rng.random(graph.arc_count) < p_live) for _ in range(scenarios))
    if costs is None:
        costs = [1.0] * labels
        if unblockable:
            costs[0] = math.inf
    seed_nodes = tuple(sorted(rng.choice(n, seeds, replace=False).tolist()))
    return Instance(graph, tuple(costs), budget, seed_nodes, ScenarioSet(live), f"rand{seed}")


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)
