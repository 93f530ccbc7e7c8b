"""Message-passing consensus over a simulated lossy mesh network.

Every value exchange is a three-leg handshake (request, reply, ack) so both
endpoints know whether the round's exchange succeeded; a neighbour whose
handshake fails is simply left out of that round's average and the remaining
weights renormalise.  All time is simulated milliseconds driven by a
deterministic event queue, so a seed fully determines a run.
"""

from __future__ import annotations

import heapq
import itertools
import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .consensus import Trajectory, spread
from .graphs import DirectedGraph

__all__ = [
    "LinkModel",
    "MessageKind",
    "MessageEnvelope",
    "NodePhase",
    "NodeAgent",
    "EventQueue",
    "HandshakeResult",
    "MeshSimulation",
    "AsyncMeshDriver",
    "handshake_exchange",
    "run_lockstep",
    "run_async",
    "link_model_to_json",
    "link_model_from_json",
]

DEFAULT_LATENCY_MS = 10.0
DEFAULT_TIMEOUT_MS = 50.0
DEFAULT_RETRIES = 2


@dataclass(frozen=True)
class LinkModel:
    """Per-message latency and loss; (from, to) pairs may override the drop."""

    latency_ms: float | tuple[float, float] = DEFAULT_LATENCY_MS
    drop: float = 0.0
    overrides: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.latency_ms, (tuple, list)):
            lo, hi = self.latency_ms
            if lo < 0 or hi < lo:
                raise ValueError(f"bad latency range {self.latency_ms}")
            object.__setattr__(self, "latency_ms", (float(lo), float(hi)))
        elif self.latency_ms < 0:
            raise ValueError(f"latency must be >= 0, got {self.latency_ms}")
        if not 0.0 <= self.drop <= 1.0:
            raise ValueError(f"drop probability must be in [0, 1], got {self.drop}")
        for key, p in self.overrides.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"override drop for {key} must be in [0, 1], got {p}")

    def drop_for(self, a: int, b: int) -> float:
        return self.overrides.get((a, b), self.drop)

    def sample_latency(self, rng: np.random.Generator) -> float:
        if isinstance(self.latency_ms, tuple):
            lo, hi = self.latency_ms
            return float(rng.uniform(lo, hi))
        return float(self.latency_ms)


class MessageKind(Enum):
    VALUE_REQUEST = "value_request"
    VALUE_REPLY = "value_reply"
    ACK = "ack"


@dataclass(frozen=True)
class MessageEnvelope:
    kind: MessageKind
    sender: int
    receiver: int
    round_no: int
    msg_id: int
    payload: float | None = None


class NodePhase(Enum):
    IDLE = "idle"
    POLLING = "polling"
    COLLECTING = "collecting"
    UPDATING = "updating"


_PHASE_ORDER = [NodePhase.IDLE, NodePhase.POLLING, NodePhase.COLLECTING, NodePhase.UPDATING]


@dataclass
class NodeAgent:
    id: int
    current_value: float
    neighbors_read: tuple[int, ...]
    phase: NodePhase = NodePhase.IDLE
    timeout_ms: float = DEFAULT_TIMEOUT_MS
    retries: int = DEFAULT_RETRIES

    def advance_phase(self, to: NodePhase):
        """Phases cycle Idle -> Polling -> Collecting -> Updating -> Idle."""
        i = _PHASE_ORDER.index(self.phase)
        if _PHASE_ORDER[(i + 1) % 4] != to:
            raise ValueError(f"illegal phase transition {self.phase} -> {to}")
        self.phase = to


class EventQueue:
    """Time-ordered event queue; ties dequeue in insertion order."""

    def __init__(self):
        self._heap: list[tuple[float, int, object]] = []
        self._seq = itertools.count()
        self.now = 0.0

    def push(self, time_ms: float, event) -> None:
        heapq.heappush(self._heap, (time_ms, next(self._seq), event))

    def pop(self):
        time_ms, _, event = heapq.heappop(self._heap)
        self.now = time_ms
        return time_ms, event

    def __len__(self):
        return len(self._heap)


@dataclass(frozen=True)
class HandshakeResult:
    completed: bool
    value: float | None = None
    elapsed_ms: float = 0.0


class MeshSimulation:
    """Deterministic single-owner simulation of consensus over a mesh.

    One instance drives either lockstep rounds (all nodes exchange, then all
    commit together) or free-running asynchronous cycles.  Snapshots handed
    out are copies.
    """

    def __init__(self, graph: DirectedGraph, s0, links: LinkModel | None = None,
                 seed: int = 0, timeout_ms: float = DEFAULT_TIMEOUT_MS,
                 retries: int = DEFAULT_RETRIES):
        s0 = np.asarray(s0, dtype=float)
        if s0.shape != (graph.n,):
            raise ValueError(f"initial state length {s0.shape} != node count {graph.n}")
        self.graph = graph
        self.links = links if links is not None else LinkModel()
        self.rng = np.random.default_rng(seed)
        self.queue = EventQueue()
        self._msg_ids = itertools.count()
        self.round_no = 0
        self.agents = [
            NodeAgent(
                id=i,
                current_value=float(s0[i]),
                neighbors_read=tuple(int(j) for j in np.flatnonzero(graph.adjacency[i])),
                timeout_ms=timeout_ms,
                retries=retries,
            )
            for i in range(graph.n)
        ]

    def values(self) -> np.ndarray:
        return np.array([a.current_value for a in self.agents])

    def _next_envelope(self, kind: MessageKind, sender: int, receiver: int,
                       payload: float | None = None) -> MessageEnvelope:
        return MessageEnvelope(kind, sender, receiver, self.round_no,
                               next(self._msg_ids), payload)

    def _deliver_leg(self, kind: MessageKind, sender: int, receiver: int,
                     timeout_ms: float, payload: float | None = None) -> tuple[bool, float]:
        """Sample one message leg: (delivered within timeout, elapsed time).

        The envelope is created even for dropped legs so message ids stay
        unique and the rng stream is consumed identically.
        """
        self._next_envelope(kind, sender, receiver, payload)
        dropped = self.rng.random() < self.links.drop_for(sender, receiver)
        latency = self.links.sample_latency(self.rng)
        if dropped or latency > timeout_ms:
            return False, timeout_ms
        return True, latency

    def handshake(self, a: int, b: int) -> HandshakeResult:
        """Request/reply/ack between reader a and source b, with retries.

        a == b always completes immediately with a's own value.  The exchange
        completes only if all three legs arrive within the per-leg timeout on
        some attempt; otherwise b is excluded from a's update this round.
        """
        agent_a = self.agents[a]
        agent_b = self.agents[b]
        if a == b:
            return HandshakeResult(True, agent_a.current_value, 0.0)
        elapsed = 0.0
        for _ in range(agent_a.retries + 1):
            ok_req, t1 = self._deliver_leg(MessageKind.VALUE_REQUEST, a, b, agent_a.timeout_ms)
            if not ok_req:
                elapsed += t1
                continue
            ok_rep, t2 = self._deliver_leg(MessageKind.VALUE_REPLY, b, a,
                                           agent_a.timeout_ms, agent_b.current_value)
            if not ok_rep:
                elapsed += t1 + t2
                continue
            ok_ack, t3 = self._deliver_leg(MessageKind.ACK, a, b, agent_a.timeout_ms)
            elapsed += t1 + t2 + t3
            if ok_ack:
                return HandshakeResult(True, agent_b.current_value, elapsed)
        return HandshakeResult(False, None, elapsed)

    def _poll_neighbors(self, i: int) -> tuple[list[float], float]:
        """Run the handshakes for node i; returns respondent values and the
        simulated time the poll took."""
        agent = self.agents[i]
        agent.advance_phase(NodePhase.POLLING)
        collected: list[float] = []
        elapsed = 0.0
        agent.advance_phase(NodePhase.COLLECTING)
        for j in agent.neighbors_read:
            result = self.handshake(i, j)
            elapsed += result.elapsed_ms
            if result.completed:
                collected.append(result.value)
        agent.advance_phase(NodePhase.UPDATING)
        return collected, elapsed

    def lockstep_round(self) -> None:
        """One synchronous round: everyone polls, then everyone commits.

        A node with no completed handshakes (possible when it has no
        self-loop and every link drops) keeps its value.
        """
        staged: list[float] = []
        for i in range(self.graph.n):
            collected, _ = self._poll_neighbors(i)
            if collected:
                staged.append(sum(collected) / len(collected))
            else:
                staged.append(self.agents[i].current_value)
            self.agents[i].advance_phase(NodePhase.IDLE)
        for agent, v in zip(self.agents, staged):
            agent.current_value = v
        self.round_no += 1


def handshake_exchange(a: int, b: int, sim: MeshSimulation) -> HandshakeResult:
    """Single reader-to-source handshake on an existing simulation."""
    return sim.handshake(a, b)


def _make_trajectory(states: list[np.ndarray]) -> Trajectory:
    spreads = tuple(spread(s) for s in states)
    return Trajectory(
        states=tuple(states),
        converged=spreads[-1] < 1e-6,
        iterations_run=len(states) - 1,
        spread_history=spreads,
    )


def run_lockstep(graph: DirectedGraph, s0, links: LinkModel | None = None,
                 rounds: int = 10, seed: int = 0) -> Trajectory:
    """Synchronous message-passing consensus; with zero drop this reproduces
    the matrix iteration exactly (each update is the plain average of the
    node's read set)."""
    if rounds < 0:
        raise ValueError(f"rounds must be >= 0, got {rounds}")
    sim = MeshSimulation(graph, s0, links, seed)
    states = [sim.values()]
    for _ in range(rounds):
        sim.lockstep_round()
        states.append(sim.values())
    return _make_trajectory(states)


class AsyncMeshDriver:
    """Free-running consensus: each node polls on its own jittered cycle and
    commits when its poll finishes.  Updates remain convex combinations of
    current values, so the state never leaves [min(s0), max(s0)]."""

    def __init__(self, graph: DirectedGraph, s0, links: LinkModel | None = None,
                 seed: int = 0, poll_interval_ms: float = 100.0):
        self.sim = MeshSimulation(graph, s0, links, seed)
        self.poll_interval_ms = poll_interval_ms
        self.now = 0.0
        for i in range(graph.n):
            self.sim.queue.push(float(self.sim.rng.uniform(0.0, poll_interval_ms)),
                                ("cycle", i))

    def values(self) -> np.ndarray:
        return self.sim.values()

    def advance_to(self, t_ms: float) -> None:
        """Process every event with timestamp <= t_ms."""
        q = self.sim.queue
        while len(q) and q._heap[0][0] <= t_ms:
            now, (kind, arg) = q.pop()
            if kind == "cycle":
                collected, elapsed = self.sim._poll_neighbors(arg)
                agent = self.sim.agents[arg]
                new_value = (sum(collected) / len(collected)) if collected \
                    else agent.current_value
                q.push(now + max(elapsed, 1e-9), ("commit", (arg, new_value)))
            else:  # commit
                i, v = arg
                self.sim.agents[i].current_value = v
                self.sim.agents[i].advance_phase(NodePhase.IDLE)
                q.push(now + self.poll_interval_ms, ("cycle", i))
        self.now = t_ms


def run_async(graph: DirectedGraph, s0, links: LinkModel | None = None,
              duration_ms: float = 10_000.0, seed: int = 0,
              poll_interval_ms: float = 100.0,
              sample_interval_ms: float = 100.0) -> Trajectory:
    """Run the asynchronous driver for a fixed simulated duration, sampling
    the state vector on a regular cadence."""
    if duration_ms < 0:
        raise ValueError(f"duration must be >= 0, got {duration_ms}")
    driver = AsyncMeshDriver(graph, s0, links, seed, poll_interval_ms)
    samples: list[np.ndarray] = []
    t = 0.0
    while t <= duration_ms:
        driver.advance_to(t)
        samples.append(driver.values())
        t += sample_interval_ms
    return _make_trajectory(samples)


# ---------------------------------------------------------------------------
# JSON interchange (1-based node labels on the wire)

def link_model_to_json(links: LinkModel) -> str:
    doc: dict = {
        "latency_ms": list(links.latency_ms) if isinstance(links.latency_ms, tuple)
        else links.latency_ms,
        "drop": links.drop,
    }
    if links.overrides:
        doc["overrides"] = [
            {"from": a + 1, "to": b + 1, "drop": p}
            for (a, b), p in sorted(links.overrides.items())
        ]
    return json.dumps(doc)


def link_model_from_json(text: str) -> LinkModel:
    doc = json.loads(text)
    latency = doc.get("latency_ms", DEFAULT_LATENCY_MS)
    if isinstance(latency, list):
        latency = tuple(latency)
    overrides = {
        (int(o["from"]) - 1, int(o["to"]) - 1): float(o["drop"])
        for o in doc.get("overrides", [])
    }
    return LinkModel(latency_ms=latency, drop=float(doc.get("drop", 0.0)),
                     overrides=overrides)
