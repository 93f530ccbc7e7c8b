"""Scenario configurations: topology + initial values + engine + layout.

The four built-ins cover the canonical demonstrations:

* ``case1``           4-node strongly connected graph, values 1..4
* ``case2``           10-node graph whose node 9 never reads anyone else and
                      drags the whole network to its own value
* ``case2-repaired``  the same graph with the one-edge fix (node 9 reads
                      node 1), which restores correct consensus
* ``dispatch3``       3-generator dispatch exchange with a column-stochastic
                      matrix conserving total output (5 + 2 + 1 = 8 MW)

Scenario JSON uses 1-based node labels, like every other wire format here.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .graphs import (
    DirectedGraph,
    StochasticMode,
    TransitionMatrix,
    build_graph,
    column_stochastic,
    metropolis,
    row_stochastic,
)
from .mesh import LinkModel, link_model_from_json, link_model_to_json
from .world import Layout, LayoutKind

__all__ = [
    "EngineKind",
    "ScenarioConfig",
    "builtin_scenario",
    "BUILTIN_NAMES",
    "load_scenario",
    "scenario_to_json",
    "scenario_from_json",
    "transition_for",
]

SCENARIO_DIR_ENV = "MISAKA_SCENARIO_DIR"


class EngineKind(Enum):
    MATRIX = "matrix"
    MESH_LOCKSTEP = "lockstep"
    MESH_ASYNC = "async"


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    graph: DirectedGraph
    initial_values: tuple[float, ...]
    mode: StochasticMode = StochasticMode.ROW
    engine: EngineKind = EngineKind.MATRIX
    layout: Layout = field(default_factory=lambda: Layout(LayoutKind.ITERATION_CHART))
    links: LinkModel = field(default_factory=LinkModel)
    seed: int = 0

    def __post_init__(self):
        if len(self.initial_values) != self.graph.n:
            raise ValueError(
                f"{len(self.initial_values)} initial values for {self.graph.n} nodes"
            )


def transition_for(config: ScenarioConfig) -> TransitionMatrix:
    if config.mode == StochasticMode.ROW:
        return row_stochastic(config.graph)
    if config.mode == StochasticMode.COLUMN:
        return column_stochastic(config.graph)
    return metropolis(config.graph)


# adjacency rows are "whom node i reads" (row mode) or "whom node i sends to"
# (column mode); either way row i lists node i's neighbour set.

_CASE1_ADJ = [
    [1, 1, 0, 0],
    [0, 1, 1, 0],
    [1, 0, 1, 1],
    [0, 1, 0, 1],
]

_CASE2_ADJ = [
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
]

_DISPATCH3_ADJ = [  # row i = node i's out-neighbours; column-normalised
    [1, 1, 0],
    [0, 1, 1],
    [1, 1, 1],
]


def _graph_from_rows(rows) -> DirectedGraph:
    return DirectedGraph(len(rows), np.array(rows, dtype=np.int8))


def _case2_repaired_adj():
    rows = [list(r) for r in _CASE2_ADJ]
    rows[8][0] = 1  # node 9 now reads node 1 (1-based: edge 9 -> 1)
    return rows


def builtin_scenario(name: str) -> ScenarioConfig:
    chart = Layout(LayoutKind.ITERATION_CHART)
    if name == "case1":
        return ScenarioConfig(
            name="case1",
            graph=_graph_from_rows(_CASE1_ADJ),
            initial_values=(1.0, 2.0, 3.0, 4.0),
            layout=replace(chart, y_range=(0.0, 10.0)),
        )
    if name == "case2":
        return ScenarioConfig(
            name="case2",
            graph=_graph_from_rows(_CASE2_ADJ),
            initial_values=tuple(float(v) for v in range(1, 11)),
            layout=replace(chart, y_range=(0.0, 12.0)),
        )
    if name == "case2-repaired":
        return ScenarioConfig(
            name="case2-repaired",
            graph=_graph_from_rows(_case2_repaired_adj()),
            initial_values=tuple(float(v) for v in range(1, 11)),
            layout=replace(chart, y_range=(0.0, 12.0)),
        )
    if name == "dispatch3":
        return ScenarioConfig(
            name="dispatch3",
            graph=_graph_from_rows(_DISPATCH3_ADJ),
            initial_values=(5.0, 2.0, 1.0),
            mode=StochasticMode.COLUMN,
            layout=replace(chart, y_range=(0.0, 8.0)),
        )
    raise KeyError(f"unknown scenario {name!r}")


BUILTIN_NAMES = ("case1", "case2", "case2-repaired", "dispatch3")


def load_scenario(name_or_path: str) -> ScenarioConfig:
    """Resolve a built-in name, a JSON file path, or a name found in the
    directory named by the MISAKA_SCENARIO_DIR environment variable."""
    if name_or_path in BUILTIN_NAMES:
        return builtin_scenario(name_or_path)
    p = Path(name_or_path)
    if p.is_file():
        return scenario_from_json(p.read_text())
    extra = os.environ.get(SCENARIO_DIR_ENV)
    if extra:
        candidate = Path(extra) / f"{name_or_path}.json"
        if candidate.is_file():
            return scenario_from_json(candidate.read_text())
    raise KeyError(f"unknown scenario {name_or_path!r}")


def scenario_to_json(config: ScenarioConfig) -> str:
    doc = {
        "name": config.name,
        "graph": {
            "n": config.graph.n,
            "edges": [[i + 1, j + 1] for i, j in config.graph.edges],
        },
        "initial_values": list(config.initial_values),
        "mode": config.mode.value,
        "engine": config.engine.value,
        "layout": {
            "kind": config.layout.kind.value,
            "x_range": list(config.layout.x_range),
            "y_range": list(config.layout.y_range),
            "x_mm": list(config.layout.x_mm),
            "y_mm": list(config.layout.y_mm),
            "surface_mm": list(config.layout.surface_mm),
        },
        "links": json.loads(link_model_to_json(config.links)),
        "seed": config.seed,
    }
    return json.dumps(doc, indent=2)


def scenario_from_json(text: str) -> ScenarioConfig:
    doc = json.loads(text)
    graph = build_graph(
        int(doc["graph"]["n"]),
        [(int(i) - 1, int(j) - 1) for i, j in doc["graph"]["edges"]],
    )
    lay = doc.get("layout", {})
    layout = Layout(
        kind=LayoutKind(lay.get("kind", "iteration_chart")),
        x_range=tuple(lay.get("x_range", (0.0, 1.0))),
        y_range=tuple(lay.get("y_range", (0.0, 10.0))),
        x_mm=tuple(lay.get("x_mm", (50.0, 950.0))),
        y_mm=tuple(lay.get("y_mm", (0.0, 500.0))),
        surface_mm=tuple(lay.get("surface_mm", (1000.0, 700.0))),
    )
    return ScenarioConfig(
        name=doc.get("name", "unnamed"),
        graph=graph,
        initial_values=tuple(float(v) for v in doc["initial_values"]),
        mode=StochasticMode(doc.get("mode", "row")),
        engine=EngineKind(doc.get("engine", "matrix")),
        layout=layout,
        links=link_model_from_json(json.dumps(doc.get("links", {}))),
        seed=int(doc.get("seed", 0)),
    )
