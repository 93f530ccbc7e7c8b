"""Live sessions: one scenario bound to an engine and a swarm scene.

A session owns the algorithm state and the tabletop scene together, applies
user commands (moves, node add/remove, edge toggles), and emits complete
EventFrame snapshots.  Every topology or value mutation restarts iteration
counting from the current values, mirroring how moving a robot mid-run
re-seeds the algorithm.

Commands are wire-format dicts with 1-based node labels; failures raise
without touching session state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .consensus import spread, step, trajectory_to_csv
from .graphs import DirectedGraph, GraphError, StochasticMode
from .mesh import AsyncMeshDriver, MeshSimulation
from .scenarios import (
    EngineKind,
    ScenarioConfig,
    scenario_from_json,
    scenario_to_json,
    transition_for,
)
from .world import (
    Layout,
    LayoutKind,
    MessengerPhase,
    MessengerTask,
    Robot,
    RobotPose,
    RobotRole,
    SwarmScene,
    WorldError,
    pose_to_value,
    tick,
    value_to_pose,
)

__all__ = ["Session", "EventFrame", "CommandError", "execute_scenario"]

CONVERGENCE_TOL = 1e-6

_NODE_PALETTE = [
    (231, 76, 60), (52, 152, 219), (46, 204, 113), (241, 196, 15),
    (155, 89, 182), (26, 188, 156), (230, 126, 34), (149, 165, 166),
    (52, 73, 94), (236, 112, 175),
]
_MESSENGER_COLOR = (189, 195, 199)
_WIDGET_COLOR = (90, 90, 90)


class CommandError(ValueError):
    """A command that cannot be applied; the session is unchanged."""


@dataclass(frozen=True)
class EventFrame:
    """Complete self-sufficient snapshot of a session."""

    seq: int
    t_ms: float
    iteration: int
    converged: bool
    robots: tuple[dict, ...]
    values: tuple[float, ...]

    def to_json(self) -> str:
        return json.dumps({
            "frame": self.seq,
            "t_ms": self.t_ms,
            "iteration": self.iteration,
            "converged": self.converged,
            "robots": list(self.robots),
            "values": list(self.values),
        })


class Session:
    """Serialized writes, lock-free snapshot reads: one owner applies
    commands and ticks; everyone else consumes immutable frames."""

    def __init__(self, config: ScenarioConfig | None = None):
        self._seq = 0
        self.t_ms = 0.0
        self.running = False
        self.config = config
        if config is None:
            self.scene = SwarmScene()
            self.graph = None
            self.values = np.zeros(0)
            self.iteration = 0
            self._states: list[np.ndarray] = []
            return
        self._bind(config.graph, np.asarray(config.initial_values, dtype=float),
                   config.layout)

    # -- wiring ------------------------------------------------------------

    def _bind(self, graph: DirectedGraph, values: np.ndarray, layout: Layout):
        """(Re)build engine state and scene for a topology + value vector."""
        self.graph = graph
        self.values = values
        self.iteration = 0
        self._states = [values.copy()]
        mode = self.config.mode
        engine = self.config.engine
        if engine == EngineKind.MATRIX:
            self._q = transition_for(replace(self.config, graph=graph,
                                             initial_values=tuple(values)))
            self._mesh = None
            self._async = None
        elif engine == EngineKind.MESH_LOCKSTEP:
            if mode != StochasticMode.ROW:
                raise CommandError("mesh engines implement the averaging protocol; "
                                   "use mode 'row'")
            self._q = None
            self._mesh = MeshSimulation(graph, values, self.config.links,
                                        self.config.seed)
            self._async = None
        else:
            if mode != StochasticMode.ROW:
                raise CommandError("mesh engines implement the averaging protocol; "
                                   "use mode 'row'")
            self._q = None
            self._mesh = None
            self._async = AsyncMeshDriver(graph, values, self.config.links,
                                          self.config.seed)
        self._build_scene(layout)

    def _build_scene(self, layout: Layout):
        scene = SwarmScene(layout=layout)
        n = self.graph.n
        for i in range(n):
            if layout.kind == LayoutKind.ITERATION_CHART:
                pose, _ = value_to_pose(layout, i, float(self.values[i]), n)
            else:
                # non-chart layouts repurpose node robots as data points;
                # park them evenly until data placement retargets them
                x0, x1 = layout.x_mm
                frac = 0.5 if n == 1 else i / (n - 1)
                pose = RobotPose(x0 + frac * (x1 - x0),
                                 layout.surface_mm[1] / 2)
            scene.robots[i] = Robot(
                id=i, pose=pose, role=RobotRole.NODE_DISPLAY,
                led_color=_NODE_PALETTE[i % len(_NODE_PALETTE)],
                screen_text=f"{self.values[i]:.4g}",
            )
            scene.node_values[i] = float(self.values[i])
        if self.config.mode == StochasticMode.COLUMN:
            # information-transmission view: one messenger per directed edge
            adj = self.graph.adjacency
            k = 0
            for j in range(n):       # row j = node j's recipients
                for i in range(n):
                    if i != j and adj[j, i]:
                        rid = n + k
                        a = scene.robots[j].pose
                        b = scene.robots[i].pose
                        mid = RobotPose((a.x + b.x) / 2, (a.y + b.y) / 2)
                        scene.robots[rid] = Robot(
                            id=rid, pose=mid, role=RobotRole.MESSENGER,
                            led_color=_MESSENGER_COLOR,
                        )
                        scene.tasks[rid] = MessengerTask(edge=(j, i))
                        k += 1
        if layout.kind == LayoutKind.TIME_SERIES:
            # two range-slider handles at the calibrated x extremes
            for w, x in enumerate(layout.x_mm):
                rid = 1000 + w
                scene.robots[rid] = Robot(id=rid, pose=RobotPose(x, 50.0),
                                          role=RobotRole.WIDGET,
                                          led_color=_WIDGET_COLOR)
        self.scene = scene

    def scene_ids(self):
        return list(self.scene.robots)

    # -- iteration ---------------------------------------------------------

    @property
    def converged(self) -> bool:
        return self.values.size > 0 and spread(self.values) < CONVERGENCE_TOL

    def step_iteration(self) -> None:
        """One consensus round under the configured engine."""
        if self.graph is None:
            raise CommandError("empty session: load a scenario first")
        engine = self.config.engine
        if engine == EngineKind.MATRIX:
            self.values = step(self._q, self.values)
        elif engine == EngineKind.MESH_LOCKSTEP:
            self._mesh.lockstep_round()
            self.values = self._mesh.values()
        else:
            self._async.advance_to(self._async.now + self._async.poll_interval_ms)
            self.values = self._async.values()
        self.iteration += 1
        self._states.append(self.values.copy())
        self._retarget_nodes()
        self._launch_messengers()

    def _retarget_nodes(self):
        if self.scene.layout.kind != LayoutKind.ITERATION_CHART:
            return
        n = self.graph.n
        for i in range(n):
            robot = self.scene.node_robot(i)
            if robot is None:
                continue
            pose, _ = value_to_pose(self.scene.layout, i, float(self.values[i]), n)
            robot.target = pose
            robot.screen_text = f"{self.values[i]:.4g}"
            self.scene.node_values[i] = float(self.values[i])

    def _launch_messengers(self):
        for rid, task in self.scene.tasks.items():
            if task.phase == MessengerPhase.AT_REST:
                self.scene.tasks[rid] = replace(task, phase=MessengerPhase.TO_SENDER,
                                                round_tag=self.iteration)

    def tick_scene(self, dt: float) -> None:
        tick(self.scene, dt)
        self.t_ms += dt * 1000.0

    # -- commands ----------------------------------------------------------

    def apply_command(self, cmd: dict) -> None:
        """Apply one wire-format command; atomic (raises leave no change)."""
        kind = cmd.get("cmd")
        handlers = {
            "move_robot": self._cmd_move_robot,
            "add_node": self._cmd_add_node,
            "remove_node": self._cmd_remove_node,
            "set_edge": self._cmd_set_edge,
            "start": lambda c: setattr(self, "running", True),
            "pause": lambda c: setattr(self, "running", False),
            "reset": self._cmd_reset,
            "set_layout": self._cmd_set_layout,
            "set_time_window": self._cmd_set_time_window,
        }
        if kind not in handlers:
            raise CommandError(f"unknown command {kind!r}")
        handlers[kind](cmd)

    def _require_scenario(self):
        if self.graph is None:
            raise CommandError("empty session: load a scenario first")

    def _cmd_move_robot(self, cmd: dict):
        self._require_scenario()
        rid = int(cmd["id"]) - 1  # wire labels are 1-based
        pose = RobotPose(float(cmd["x_mm"]), float(cmd["y_mm"]))
        robot = self.scene.robots.get(rid)
        if robot is None:
            raise CommandError(f"unknown robot id {rid + 1}")
        if robot.role == RobotRole.MESSENGER:
            raise CommandError("messenger robots are system-driven")
        if robot.role == RobotRole.WIDGET or \
                self.scene.layout.kind != LayoutKind.ITERATION_CHART:
            robot.pose = pose
            robot.target = None
            return
        try:
            value = pose_to_value(self.scene.layout, pose)
        except WorldError as e:
            raise CommandError(str(e))
        new_values = self.values.copy()
        new_values[rid] = value
        self._bind(self.graph, new_values, self.scene.layout)

    def _cmd_add_node(self, cmd: dict):
        self._require_scenario()
        pose = RobotPose(float(cmd["x_mm"]), float(cmd["y_mm"]))
        n = self.graph.n
        try:
            value = pose_to_value(self.scene.layout, pose)
            # capacity check before committing anything
            value_to_pose(self.scene.layout, n, value, n + 1)
        except WorldError as e:
            raise CommandError(str(e))
        adj = np.zeros((n + 1, n + 1), dtype=np.int8)
        adj[:n, :n] = self.graph.adjacency
        adj[n, n] = 1
        # join the topology through the nearest existing node, both ways
        nearest = min(
            range(n),
            key=lambda i: self.scene.robots[i].pose.distance_to(pose)
            if self.scene.node_robot(i) else float("inf"),
        )
        adj[n, nearest] = 1
        adj[nearest, n] = 1
        new_graph = DirectedGraph(n + 1, adj)
        self._bind(new_graph, np.append(self.values, value), self.scene.layout)

    def _cmd_remove_node(self, cmd: dict):
        self._require_scenario()
        rid = int(cmd["id"]) - 1
        n = self.graph.n
        if not (0 <= rid < n) or self.scene.node_robot(rid) is None:
            raise CommandError(f"unknown node id {rid + 1}")
        if n == 1:
            raise CommandError("cannot remove the last node")
        keep = [i for i in range(n) if i != rid]
        adj = self.graph.adjacency[np.ix_(keep, keep)]
        try:
            new_graph = DirectedGraph(n - 1, adj)
        except GraphError as e:
            raise CommandError(f"removal would leave a node with nothing to read: {e}")
        self._bind(new_graph, self.values[keep], self.scene.layout)

    def _cmd_set_edge(self, cmd: dict):
        self._require_scenario()
        i, j = int(cmd["from"]) - 1, int(cmd["to"]) - 1
        present = bool(cmd.get("present", True))
        n = self.graph.n
        if not (0 <= i < n and 0 <= j < n):
            raise CommandError(f"edge endpoints ({i + 1}, {j + 1}) out of range")
        adj = np.array(self.graph.adjacency)
        adj[i, j] = 1 if present else 0
        try:
            new_graph = DirectedGraph(n, adj)
        except GraphError as e:
            raise CommandError(str(e))
        self._bind(new_graph, self.values.copy(), self.scene.layout)

    def _cmd_reset(self, cmd: dict):
        self._require_scenario()
        self._bind(self.config.graph,
                   np.asarray(self.config.initial_values, dtype=float),
                   self.config.layout)

    def _cmd_set_layout(self, cmd: dict):
        self._require_scenario()
        lay = self.scene.layout
        new_layout = Layout(
            kind=LayoutKind(cmd.get("kind", lay.kind.value)),
            x_range=tuple(cmd.get("x_range", lay.x_range)),
            y_range=tuple(cmd.get("y_range", lay.y_range)),
            x_mm=tuple(cmd.get("x_mm", lay.x_mm)),
            y_mm=tuple(cmd.get("y_mm", lay.y_mm)),
            surface_mm=tuple(cmd.get("surface_mm", lay.surface_mm)),
        )
        self._bind(self.graph, self.values.copy(), new_layout)

    def _cmd_set_time_window(self, cmd: dict):
        self._require_scenario()
        lay = self.scene.layout
        if lay.kind != LayoutKind.TIME_SERIES:
            raise CommandError("set_time_window needs a time series layout")
        t_min, t_max = float(cmd["t_min"]), float(cmd["t_max"])
        if not t_min < t_max:
            raise CommandError(f"bad window ({t_min}, {t_max})")
        self.scene.layout = replace(lay, time_window=(t_min, t_max))

    # -- snapshots & export ------------------------------------------------

    def snapshot(self) -> EventFrame:
        robots = []
        for rid in sorted(self.scene.robots):
            r = self.scene.robots[rid]
            robots.append({
                "id": rid + 1,
                "x_mm": r.pose.x,
                "y_mm": r.pose.y,
                "heading_rad": r.pose.heading,
                "rgb": list(r.led_color),
                "text": r.screen_text,
                "role": r.role.value,
            })
        self._seq += 1
        return EventFrame(
            seq=self._seq,
            t_ms=self.t_ms,
            iteration=self.iteration,
            converged=self.converged,
            robots=tuple(robots),
            values=tuple(float(v) for v in self.values),
        )

    def export_run(self) -> tuple[str, str]:
        """(trajectory CSV, scenario JSON); needs at least one iteration."""
        if self.iteration < 1:
            raise CommandError("no iterations recorded yet")
        from .consensus import Trajectory
        states = tuple(self._states)
        traj = Trajectory(states=states, converged=self.converged,
                          iterations_run=self.iteration,
                          spread_history=tuple(spread(s) for s in states))
        cfg = replace(self.config, graph=self.graph,
                      initial_values=tuple(float(v) for v in states[0]))
        return trajectory_to_csv(traj), scenario_to_json(cfg)

    @staticmethod
    def import_bundle(scenario_json: str) -> "Session":
        return Session(scenario_from_json(scenario_json))


def execute_scenario(config: ScenarioConfig, iterations: int | None = None,
                     until_converged: bool = False, engine: EngineKind | None = None,
                     seed: int | None = None):
    """Headless run of a scenario; returns a Trajectory.

    With ``iterations`` the run is exactly that long; with
    ``until_converged`` it stops when the spread drops under 1e-6 (cap 1000
    rounds for the mesh engines, ConvergenceConfig defaults for the matrix
    engine)."""
    from .consensus import ConvergenceConfig, run, run_exact
    from .mesh import run_async, run_lockstep

    engine = engine if engine is not None else config.engine
    seed = seed if seed is not None else config.seed
    s0 = np.asarray(config.initial_values, dtype=float)
    if engine == EngineKind.MATRIX:
        q = transition_for(config)
        if until_converged:
            return run(q, s0, ConvergenceConfig())
        return run_exact(q, s0, iterations if iterations is not None else 10)
    if engine == EngineKind.MESH_LOCKSTEP:
        if until_converged:
            sim = MeshSimulation(config.graph, s0, config.links, seed)
            states = [sim.values()]
            for _ in range(1000):
                sim.lockstep_round()
                states.append(sim.values())
                if spread(states[-1]) < CONVERGENCE_TOL:
                    break
            from .mesh import _make_trajectory
            return _make_trajectory(states)
        return run_lockstep(config.graph, s0, config.links,
                            iterations if iterations is not None else 10, seed)
    # async engine: one "iteration" = one poll interval of simulated time
    duration = 100.0 * (iterations if iterations is not None else 100)
    if until_converged:
        duration = 100.0 * 10_000
    traj = run_async(config.graph, s0, config.links, duration_ms=duration, seed=seed)
    if until_converged:
        # trim at first converged sample for a tidy trajectory
        for k, s in enumerate(traj.states):
            if spread(s) < CONVERGENCE_TOL:
                from .mesh import _make_trajectory
                return _make_trajectory(list(traj.states[: k + 1]))
    return traj
