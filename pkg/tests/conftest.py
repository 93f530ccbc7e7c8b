import numpy as np
import pytest

from gridswarm.graphs import DirectedGraph


CASE1_ADJ = np.array([
    [1, 1, 0, 0],
    [0, 1, 1, 0],
    [1, 0, 1, 1],
    [0, 1, 0, 1],
])

CASE2_ADJ = np.array([
    [1, 1, 0, 0, 1, 1, 0, 1, 0, 0],
    [0, 1, 1, 0, 0, 0, 1, 0, 1, 0],
    [1, 0, 1, 1, 0, 0, 1, 1, 0, 1],
    [0, 1, 0, 1, 0, 1, 0, 0, 1, 0],
    [0, 0, 0, 0, 1, 0, 0, 0, 0, 1],
    [0, 0, 0, 0, 0, 1, 0, 1, 0, 0],
    [0, 0, 0, 0, 0, 0, 1, 0, 0, 1],
    [0, 1, 0, 0, 1, 1, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 1, 0],
    [0, 0, 0, 0, 1, 0, 1, 0, 1, 1],
])

# 3-node dispatch graph: row i = node i's out-neighbour set
DISPATCH3_ADJ = np.array([
    [1, 1, 0],
    [0, 1, 1],
    [1, 1, 1],
])

# the 6-decimal iteration table for the 4-node run from s0 = [1, 2, 3, 4]
CASE1_TABLE = np.array([
    [1, 2, 3, 4],
    [1.5, 2.5, 2.666667, 3],
    [2, 2.583333, 2.388889, 2.75],
    [2.291667, 2.486111, 2.37963, 2.666667],
    [2.388889, 2.43287, 2.445988, 2.576389],
    [2.41088, 2.439429, 2.470422, 2.50463],
    [2.425154, 2.454925, 2.461977, 2.472029],
    [2.44004, 2.458451, 2.453054, 2.463477],
    [2.449246, 2.455752, 2.45219, 2.460964],
    [2.452499, 2.453971, 2.454133, 2.458358],
    [2.453235, 2.454052, 2.454997, 2.456165],
])


@pytest.fixture
def case1():
    return DirectedGraph(4, CASE1_ADJ)


@pytest.fixture
def case2():
    return DirectedGraph(10, CASE2_ADJ)


@pytest.fixture
def dispatch3():
    return DirectedGraph(3, DISPATCH3_ADJ)


def random_valid_graph(rng, n):
    """Random 0/1 adjacency with every row nonzero."""
    while True:
        a = (rng.random((n, n)) < rng.uniform(0.2, 0.7)).astype(np.int8)
        if (a.sum(axis=1) > 0).all():
            return DirectedGraph(n, a)


def random_strong_graph(rng, n):
    """Random graph that is strongly connected and has self-loops."""
    from gridswarm.graphs import scc_analyze
    while True:
        a = (rng.random((n, n)) < rng.uniform(0.3, 0.7)).astype(np.int8)
        np.fill_diagonal(a, 1)
        g = DirectedGraph(n, a)
        if scc_analyze(g).is_strongly_connected:
            return g


def reachability_oracle(adj):
    """Brute-force all-pairs reachability by boolean matrix powers."""
    n = adj.shape[0]
    reach = adj.astype(bool) | np.eye(n, dtype=bool)
    for _ in range(n):
        reach = reach | (reach @ reach)
    return reach


def scc_oracle(adj):
    """Components from mutual reachability; returns a frozenset of frozensets."""
    reach = reachability_oracle(adj)
    mutual = reach & reach.T
    return frozenset(frozenset(np.flatnonzero(mutual[i]).tolist())
                     for i in range(adj.shape[0]))
