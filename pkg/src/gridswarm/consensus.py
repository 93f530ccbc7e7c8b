"""Synchronous consensus iteration: s^(k+1) = Q s^(k).

Runs record every intermediate state so trajectories can be replayed,
exported, and compared against golden data.  The fixed-point predictor is
the analytical oracle used to cross-check iterated limits.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .graphs import StochasticMode, TransitionMatrix

__all__ = [
    "ConvergenceConfig",
    "Trajectory",
    "FixedPointPrediction",
    "step",
    "run",
    "spread",
    "predict_fixed_point",
    "trajectory_to_csv",
    "trajectory_from_csv",
]


class ConsensusError(ValueError):
    pass


@dataclass(frozen=True)
class ConvergenceConfig:
    """When to stop iterating: spread threshold and an iteration cap."""

    tolerance: float = 1e-6
    max_iterations: int = 1000

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ConsensusError(f"tolerance must be > 0, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ConsensusError(f"max_iterations must be >= 1, got {self.max_iterations}")


@dataclass(frozen=True)
class Trajectory:
    """Recorded run: states s^(0)..s^(K), per-step spread, and the verdict."""

    states: tuple[np.ndarray, ...]
    converged: bool
    iterations_run: int
    spread_history: tuple[float, ...]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def as_array(self) -> np.ndarray:
        """(K+1, n) array of states."""
        return np.vstack(self.states)


@dataclass(frozen=True)
class FixedPointPrediction:
    """Stationary weights of Q and the limit they imply for a start vector."""

    weights: np.ndarray
    mode: StochasticMode

    def predicted_limit(self, s0) -> float | np.ndarray:
        """Row mode: the common scalar all nodes reach.  Column mode: the
        limit vector (total of s0 distributed by the stationary weights)."""
        s0 = np.asarray(s0, dtype=float)
        if self.mode == StochasticMode.COLUMN:
            return float(s0.sum()) * self.weights
        return float(self.weights @ s0)


def _as_state(s, n: int) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.shape != (n,):
        raise ConsensusError(f"state length {s.shape} does not match node count {n}")
    if not np.isfinite(s).all():
        raise ConsensusError("state contains non-finite values")
    return s


def step(q: TransitionMatrix, s) -> np.ndarray:
    """One iteration: Q @ s.  The input vector is not modified."""
    s = _as_state(s, q.n)
    return q.weights @ s


def spread(s) -> float:
    """max(s) - min(s); zero exactly at consensus."""
    s = np.asarray(s, dtype=float)
    if s.size == 0:
        raise ConsensusError("spread of an empty state")
    return float(s.max() - s.min())


def run(q: TransitionMatrix, s0, cfg: ConvergenceConfig = ConvergenceConfig()) -> Trajectory:
    """Iterate until the spread drops below cfg.tolerance or the cap is hit."""
    s = _as_state(s0, q.n)
    states = [s]
    spreads = [spread(s)]
    converged = spreads[-1] < cfg.tolerance
    k = 0
    while not converged and k < cfg.max_iterations:
        s = q.weights @ s
        if not np.isfinite(s).all():
            raise ConsensusError(f"non-finite state at iteration {k + 1}; ill-formed weights?")
        k += 1
        states.append(s)
        spreads.append(spread(s))
        converged = spreads[-1] < cfg.tolerance
    return Trajectory(
        states=tuple(states),
        converged=converged,
        iterations_run=k,
        spread_history=tuple(spreads),
    )


def run_exact(q: TransitionMatrix, s0, iterations: int) -> Trajectory:
    """Iterate a fixed number of times regardless of convergence."""
    s = _as_state(s0, q.n)
    states = [s]
    spreads = [spread(s)]
    for _ in range(iterations):
        s = q.weights @ s
        states.append(s)
        spreads.append(spread(s))
    return Trajectory(
        states=tuple(states),
        converged=spreads[-1] < 1e-6,
        iterations_run=iterations,
        spread_history=tuple(spreads),
    )


def predict_fixed_point(q: TransitionMatrix) -> FixedPointPrediction:
    """Stationary direction of Q by power iteration, tolerance 1e-12.

    Row-stochastic: the left eigenvector for eigenvalue 1, normalised to sum
    1; every node converges to weights . s0.  Column-stochastic: the right
    eigenvector; the limit vector is sum(s0) * weights.  Requires the
    structural graph to be strongly connected with a self-loop so the
    stationary direction is unique and attracting.
    """
    m = q.weights.T if q.mode in (StochasticMode.ROW, StochasticMode.DOUBLY) else q.weights
    if not _structurally_strong(q.weights):
        raise ConsensusError(
            "transition matrix is not strongly connected; run scc_analyze on "
            "the topology and repair it before predicting a fixed point"
        )
    v = np.full(q.n, 1.0 / q.n)
    for _ in range(100_000):
        nxt = m @ v
        nxt = nxt / nxt.sum()
        if np.abs(nxt - v).max() < 1e-12:
            v = nxt
            break
        v = nxt
    return FixedPointPrediction(weights=v, mode=q.mode)


def _structurally_strong(w: np.ndarray) -> bool:
    n = w.shape[0]
    reach = w > 0
    frontier = reach.copy()
    for _ in range(n):
        frontier = frontier @ reach
        reach = reach | frontier
    return bool(reach.all())


# ---------------------------------------------------------------------------
# CSV interchange: header iteration,node_1,...,node_n

def trajectory_to_csv(traj: Trajectory) -> str:
    n = traj.states[0].shape[0]
    out = io.StringIO()
    out.write("iteration," + ",".join(f"node_{j + 1}" for j in range(n)) + "\n")
    for k, s in enumerate(traj.states):
        out.write(str(k) + "," + ",".join(format(v, ".17g") for v in s) + "\n")
    return out.getvalue()


def trajectory_from_csv(text: str) -> np.ndarray:
    """(K+1, n) array parsed from the trajectory CSV format."""
    lines = [ln for ln in text.strip().splitlines() if ln]
    rows = [[float(v) for v in ln.split(",")[1:]] for ln in lines[1:]]
    return np.array(rows, dtype=float)
