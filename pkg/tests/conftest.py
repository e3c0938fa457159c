import numpy as np
import pytest

from hotspan import Episode, Graph, PiecewiseSchedule, generate_random_graph, simulate_dataset


@pytest.fixture(scope="session")
def medium_data():
    """1000-node graph, hot span [3, 6), two episodes; a few seconds of EM at most."""
    g = generate_random_graph(1000, 5.0, seed=11)
    sched = PiecewiseSchedule.hot_span(0.15, 0.35, 3.0, 6.0, 1.0)
    return simulate_dataset(g, sched, 2, 12.0, seed=5, min_activations=50)


@pytest.fixture
def chain():
    """a -> b -> c path with each node activated in turn."""
    g = Graph.from_edges(3, [0, 1], [1, 2])
    return g, Episode([0, 1, 2], [0.0, 1.0, 2.5], 0, 10.0)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
