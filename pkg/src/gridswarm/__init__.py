"""gridswarm: a tabletop swarm testbed for distributed averaging.

Library layers, lowest first:

* :mod:`gridswarm.graphs` -- topologies, transition matrices, SCC diagnosis
* :mod:`gridswarm.consensus` -- the synchronous iteration and its oracle
* :mod:`gridswarm.mesh` -- message-passing simulation over lossy links
* :mod:`gridswarm.world` -- robot poses, kinematics, layouts, messengers
* :mod:`gridswarm.scenarios` / :mod:`gridswarm.session` -- live sessions
* :mod:`gridswarm.service` -- websocket frame streaming
* :mod:`gridswarm.cli` -- run / verify / analyze / serve
"""

from .consensus import (
    ConvergenceConfig,
    FixedPointPrediction,
    Trajectory,
    predict_fixed_point,
    run,
    run_exact,
    spread,
    step,
)
from .graphs import (
    DirectedGraph,
    SccReport,
    StochasticMode,
    TransitionMatrix,
    build_graph,
    column_stochastic,
    metropolis,
    row_stochastic,
    scc_analyze,
    suggest_repair,
)
from .mesh import LinkModel, MeshSimulation, run_async, run_lockstep
from .scenarios import EngineKind, ScenarioConfig, builtin_scenario, load_scenario
from .session import EventFrame, Session, execute_scenario

__all__ = [
    "DirectedGraph", "SccReport", "StochasticMode", "TransitionMatrix",
    "build_graph", "column_stochastic", "metropolis", "row_stochastic",
    "scc_analyze", "suggest_repair",
    "ConvergenceConfig", "FixedPointPrediction", "Trajectory",
    "predict_fixed_point", "run", "run_exact", "spread", "step",
    "LinkModel", "MeshSimulation", "run_async", "run_lockstep",
    "EngineKind", "ScenarioConfig", "builtin_scenario", "load_scenario",
    "EventFrame", "Session", "execute_scenario",
]

__version__ = "0.1.0"
