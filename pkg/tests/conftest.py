import numpy as np
import pytest

from khopsim.graph import Graph, from_edge_list


def random_graph(rng, n, density):
    upper = np.triu(rng.random((n, n)) < density, 1)
    return Graph(upper | upper.T)


def random_connected_graph(rng, n, density):
    """Random spanning tree plus extra random edges."""
    order = rng.permutation(n)
    edges = [(int(order[i]), int(order[rng.integers(i)])) for i in range(1, n)]
    g = random_graph(rng, n, density)
    return from_edge_list(n, edges + g.edges())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def triangle():
    return from_edge_list(3, [(0, 1), (1, 2), (2, 0)])


@pytest.fixture
def tri_path_pair():
    """Triangle a-b-c and the path b-a-c (a=0, b=1, c=2)."""
    return (from_edge_list(3, [(0, 1), (1, 2), (2, 0)]),
            from_edge_list(3, [(1, 0), (0, 2)]))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
