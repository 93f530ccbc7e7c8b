"""Directed communication topologies and the transition matrices built from them.

A graph row is read as "whom node i listens to": row i of the adjacency
matrix lists the nodes whose values node i incorporates each round.  All
public constructors reject rows of zeros because the row-normalised weights
would divide by zero.

Node indices are 0-based internally; the JSON interchange format uses
1-based labels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "DirectedGraph",
    "StochasticMode",
    "TransitionMatrix",
    "SccReport",
    "build_graph",
    "row_stochastic",
    "column_stochastic",
    "metropolis",
    "scc_analyze",
    "suggest_repair",
    "graph_to_json",
    "graph_from_json",
    "adjacency_to_csv",
    "adjacency_from_csv",
]


class GraphError(ValueError):
    """Raised for malformed topologies (bad endpoints, zero rows, asymmetry)."""


class StochasticMode(Enum):
    ROW = "row"
    COLUMN = "column"
    DOUBLY = "doubly"


@dataclass(frozen=True)
class DirectedGraph:
    """0/1 adjacency; entry (i, j) == 1 means node i reads node j's value."""

    n: int
    adjacency: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=np.int8)
        if self.n < 1:
            raise GraphError(f"node count must be >= 1, got {self.n}")
        if a.shape != (self.n, self.n):
            raise GraphError(f"adjacency shape {a.shape} != ({self.n}, {self.n})")
        if not np.isin(a, (0, 1)).all():
            raise GraphError("adjacency entries must be 0 or 1")
        zero_rows = np.flatnonzero(a.sum(axis=1) == 0)
        if zero_rows.size:
            raise GraphError(
                f"rows {zero_rows.tolist()} have no incoming reads; "
                "row-normalised weights would divide by zero"
            )
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)

    @property
    def edges(self) -> list[tuple[int, int]]:
        """Sorted (i, j) pairs where adjacency[i, j] == 1 (0-based)."""
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.adjacency))]

    def with_edge(self, i: int, j: int) -> "DirectedGraph":
        a = np.array(self.adjacency)
        a[i, j] = 1
        return DirectedGraph(self.n, a)

    def is_symmetric(self) -> bool:
        return bool((self.adjacency == self.adjacency.T).all())


@dataclass(frozen=True)
class TransitionMatrix:
    """Nonnegative iteration weights with a declared stochasticity mode."""

    n: int
    weights: np.ndarray
    mode: StochasticMode

    _TOL = 1e-12

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.n, self.n):
            raise GraphError(f"weights shape {w.shape} != ({self.n}, {self.n})")
        if (w < 0).any():
            raise GraphError("weights must be nonnegative")
        if self.mode in (StochasticMode.ROW, StochasticMode.DOUBLY):
            err = np.abs(w.sum(axis=1) - 1.0).max()
            if err > self._TOL:
                raise GraphError(f"row sums deviate from 1 by {err:.3g}")
        if self.mode in (StochasticMode.COLUMN, StochasticMode.DOUBLY):
            err = np.abs(w.sum(axis=0) - 1.0).max()
            if err > self._TOL:
                raise GraphError(f"column sums deviate from 1 by {err:.3g}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class SccReport:
    """Strong-connectivity diagnosis of a directed graph.

    ``closed_components`` are components whose members read values only from
    inside the component; any such component other than the whole graph traps
    the iteration at its own value.  ``isolated_sources`` are the single-node
    closed components whose only read is their self-loop.
    """

    components: tuple[frozenset[int], ...]
    condensation: tuple[tuple[int, int], ...]  # (from_comp, to_comp) read edges
    closed_components: tuple[frozenset[int], ...]
    is_strongly_connected: bool
    isolated_sources: tuple[int, ...] = field(default=())


def build_graph(n: int, edges: list[tuple[int, int]]) -> DirectedGraph:
    """Build a graph from (reader, source) pairs, 0-based.

    Duplicate pairs collapse to a single 1.  Raises GraphError for out-of-range
    endpoints or if any row ends up all-zero.
    """
    if n < 1:
        raise GraphError(f"node count must be >= 1, got {n}")
    a = np.zeros((n, n), dtype=np.int8)
    for i, j in edges:
        if not (0 <= i < n and 0 <= j < n):
            raise GraphError(f"edge ({i}, {j}) out of range for n={n}")
        a[i, j] = 1
    return DirectedGraph(n, a)


def row_stochastic(g: DirectedGraph) -> TransitionMatrix:
    """Each node averages the values it reads: q_ij = a_ij / (row sum of i)."""
    a = g.adjacency.astype(float)
    w = a / a.sum(axis=1, keepdims=True)
    return TransitionMatrix(g.n, w, StochasticMode.ROW)


def column_stochastic(g: DirectedGraph) -> TransitionMatrix:
    """Each sender splits its value equally among its out-neighbours.

    Row j of the adjacency is taken as node j's recipient set, so
    q_ij = a_ji / (row sum of j) and every column sums to 1; the iteration
    conserves the total of the state vector.
    """
    a = g.adjacency.astype(float)
    w = a.T / a.sum(axis=1)
    return TransitionMatrix(g.n, w, StochasticMode.COLUMN)


def metropolis(g: DirectedGraph) -> TransitionMatrix:
    """Doubly stochastic weights for a symmetric graph with self-loops.

    Off-diagonal: q_ij = 1 / (1 + max(deg_i, deg_j)) for each undirected
    neighbour pair, where deg counts neighbours other than self; the diagonal
    absorbs the remainder.  Drives consensus to the uniform average.
    """
    a = g.adjacency
    if not g.is_symmetric():
        bad = np.argwhere(a != a.T)
        i, j = bad[0]
        raise GraphError(f"adjacency not symmetric: ({i}, {j}) vs ({j}, {i})")
    if not a.diagonal().all():
        missing = np.flatnonzero(a.diagonal() == 0)
        raise GraphError(f"metropolis weights need self-loops on every node; missing {missing.tolist()}")
    deg = a.sum(axis=1) - 1  # neighbours excluding self
    w = np.zeros((g.n, g.n))
    for i in range(g.n):
        for j in range(g.n):
            if i != j and a[i, j]:
                w[i, j] = 1.0 / (1.0 + max(deg[i], deg[j]))
    np.fill_diagonal(w, 1.0 - w.sum(axis=1))
    return TransitionMatrix(g.n, w, StochasticMode.DOUBLY)


def _tarjan_components(adj: np.ndarray) -> list[list[int]]:
    """Iterative Tarjan SCC over rows-as-out-edges; linear in nodes + edges."""
    n = adj.shape[0]
    succ = [np.flatnonzero(adj[i]).tolist() for i in range(n)]
    index = [-1] * n
    lowlink = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    counter = 0
    components: list[list[int]] = []

    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = lowlink[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            while pi < len(succ[v]):
                w = succ[v][pi]
                pi += 1
                if index[w] == -1:
                    work[-1] = (v, pi)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if lowlink[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                components.append(comp)
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
    return components


def scc_analyze(g: DirectedGraph) -> SccReport:
    """Partition into strongly connected components and find the closed ones.

    Row i lists the nodes i reads, so a component is closed when none of its
    members reads a value from outside the component.
    """
    comps = _tarjan_components(g.adjacency)
    comp_of = {}
    for ci, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = ci
    cond_edges = set()
    for i, j in zip(*np.nonzero(g.adjacency)):
        ci, cj = comp_of[int(i)], comp_of[int(j)]
        if ci != cj:
            cond_edges.add((ci, cj))
    # closed = no read edge leaving the component
    has_out = {ci for ci, _ in cond_edges}
    closed = [frozenset(comp) for ci, comp in enumerate(comps) if ci not in has_out]
    isolated = tuple(
        sorted(v for c in closed if len(c) == 1 for v in c
               if g.adjacency[v].sum() == g.adjacency[v, v])
    )
    return SccReport(
        components=tuple(frozenset(c) for c in comps),
        condensation=tuple(sorted(cond_edges)),
        closed_components=tuple(sorted(closed, key=min)),
        is_strongly_connected=len(comps) == 1,
        isolated_sources=isolated,
    )


def suggest_repair(g: DirectedGraph, report: SccReport) -> list[tuple[int, int]]:
    """Minimal edge additions that make g strongly connected.

    Eswaran-Tarjan augmentation on the condensation DAG (arcs point in the
    read direction, so sinks are the closed components and sources are the
    components nobody reads from).  Sources are matched to reachable sinks,
    the matched pairs are threaded into one cycle sink_i -> source_{i+1},
    and leftover sinks/sources are spliced onto that cycle, one new edge
    each.  Each condensation arc becomes the concrete edge between the
    lowest-labelled nodes of the two components, for determinism.
    """
    if report.is_strongly_connected:
        return []
    comps = report.components
    nc = len(comps)
    succ: list[set[int]] = [set() for _ in range(nc)]
    has_in = set()
    for ci, cj in report.condensation:
        succ[ci].add(cj)
        has_in.add(cj)
    sinks = sorted((ci for ci in range(nc) if not succ[ci]), key=lambda c: min(comps[c]))
    sources = sorted((ci for ci in range(nc) if ci not in has_in), key=lambda c: min(comps[c]))

    # reachability source -> sink over the condensation
    def reaches(start: int) -> set[int]:
        seen = {start}
        todo = [start]
        while todo:
            for nxt in succ[todo.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        return seen

    reach = {v: reaches(v) for v in sources}
    # maximum bipartite matching (Kuhn) of sources to reachable sinks
    match_sink: dict[int, int] = {}

    def try_assign(v: int, visited: set[int]) -> bool:
        for w in sinks:
            if w in reach[v] and w not in visited:
                visited.add(w)
                if w not in match_sink or try_assign(match_sink[w], visited):
                    match_sink[w] = v
                    return True
        return False

    for v in sources:
        try_assign(v, set())

    pairs = sorted(((v, w) for w, v in match_sink.items()), key=lambda p: min(comps[p[0]]))
    spare_sinks = [w for w in sinks if w not in match_sink]
    spare_sources = [v for v in sources if v not in match_sink.values()]

    arcs: list[tuple[int, int]] = []  # (reader comp, read comp)
    p = len(pairs)
    for k, (_, w) in enumerate(pairs):
        v_next = pairs[(k + 1) % p][0]
        if w != v_next:
            arcs.append((w, v_next))
    # leftover sinks exit into the cycle; leftover sources get read from it
    cycle_source = pairs[0][0]
    cycle_sink = pairs[0][1]
    for w in spare_sinks:
        arcs.append((w, cycle_source))
    for v in spare_sources:
        arcs.append((cycle_sink, v))
    return [(min(comps[a]), min(comps[b])) for a, b in arcs]


# ---------------------------------------------------------------------------
# interchange formats

def graph_to_json(g: DirectedGraph) -> str:
    """Serialize as {"n": n, "edges": [[from, to], ...]} with 1-based labels."""
    return json.dumps({"n": g.n, "edges": [[i + 1, j + 1] for i, j in g.edges]})


def graph_from_json(text: str) -> DirectedGraph:
    doc = json.loads(text)
    edges = [(int(i) - 1, int(j) - 1) for i, j in doc["edges"]]
    return build_graph(int(doc["n"]), edges)


def adjacency_to_csv(g: DirectedGraph) -> str:
    return "\n".join(",".join(str(int(v)) for v in row) for row in g.adjacency) + "\n"


def adjacency_from_csv(text: str) -> DirectedGraph:
    rows = [line.split(",") for line in text.strip().splitlines()]
    a = np.array([[int(v) for v in row] for row in rows], dtype=np.int8)
    return DirectedGraph(a.shape[0], a)
