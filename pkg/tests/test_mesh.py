import numpy as np
import pytest

from gridswarm.consensus import run_exact, spread
from gridswarm.graphs import build_graph, row_stochastic
from gridswarm.mesh import (
    LinkModel,
    MeshSimulation,
    NodePhase,
    link_model_from_json,
    link_model_to_json,
    run_async,
    run_lockstep,
)

from conftest import CASE1_TABLE, random_strong_graph, random_valid_graph

S0_CASE1 = (1.0, 2.0, 3.0, 4.0)


class TestLockstep:
    def test_ideal_links_reproduce_matrix_iteration(self, case1):
        traj = run_lockstep(case1, S0_CASE1, LinkModel(drop=0.0), rounds=10)
        matrix = run_exact(row_stochastic(case1), S0_CASE1, 10)
        assert np.abs(traj.as_array() - matrix.as_array()).max() < 1e-12
        assert np.abs(traj.as_array() - CASE1_TABLE).max() < 5e-7

    def test_zero_rounds_is_initial_state(self, case1):
        traj = run_lockstep(case1, S0_CASE1, rounds=0)
        assert len(traj.states) == 1
        assert (traj.states[0] == S0_CASE1).all()

    def test_total_loss_freezes_values(self, case1):
        # with every non-self link dead, each node's only respondent is itself
        traj = run_lockstep(case1, S0_CASE1, LinkModel(drop=1.0), rounds=5)
        assert (traj.as_array() == np.tile(S0_CASE1, (6, 1))).all()

    def test_equivalence_on_random_graphs(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            n = int(rng.integers(2, 9))
            g = random_strong_graph(rng, n)
            s0 = rng.uniform(0, 10, n)
            mesh = run_lockstep(g, s0, rounds=8, seed=1)
            matrix = run_exact(row_stochastic(g), s0, 8)
            assert np.abs(mesh.as_array() - matrix.as_array()).max() < 1e-12

    def test_determinism_same_seed(self, case2):
        s0 = np.arange(1.0, 11.0)
        links = LinkModel(drop=0.3)
        a = run_lockstep(case2, s0, links, rounds=20, seed=99).as_array()
        b = run_lockstep(case2, s0, links, rounds=20, seed=99).as_array()
        assert (a == b).all()

    def test_different_seeds_diverge_under_loss(self, case2):
        s0 = np.arange(1.0, 11.0)
        links = LinkModel(drop=0.4)
        a = run_lockstep(case2, s0, links, rounds=20, seed=1).as_array()
        b = run_lockstep(case2, s0, links, rounds=20, seed=2).as_array()
        assert not (a == b).all()


class TestHandshake:
    def test_ideal_link_completes_with_source_value(self, case1):
        sim = MeshSimulation(case1, S0_CASE1, LinkModel(drop=0.0))
        result = sim.handshake(0, 1)
        assert result.completed
        assert result.value == 2.0

    def test_self_handshake_is_instant(self, case1):
        sim = MeshSimulation(case1, S0_CASE1, LinkModel(drop=1.0))
        result = sim.handshake(2, 2)
        assert result.completed
        assert result.value == 3.0
        assert result.elapsed_ms == 0.0

    def test_dead_link_fails_after_retries(self, case1):
        sim = MeshSimulation(case1, S0_CASE1,
                             LinkModel(overrides={(0, 1): 1.0}))
        assert not sim.handshake(0, 1).completed
        # the reverse exchange needs its reply to cross the same dead link
        assert not sim.handshake(1, 0).completed

    def test_monte_carlo_completion_rate(self, case1):
        # per attempt all three legs must survive: (1-0.5)^3; three attempts
        sim = MeshSimulation(case1, S0_CASE1, LinkModel(drop=0.5), seed=42,
                             retries=2)
        p_attempt = 0.5 ** 3
        analytic = 1 - (1 - p_attempt) ** 3
        trials = 10_000
        completed = sum(sim.handshake(0, 1).completed for _ in range(trials))
        assert abs(completed / trials - analytic) < 0.02

    def test_latency_beyond_timeout_fails(self, case1):
        sim = MeshSimulation(case1, S0_CASE1, LinkModel(latency_ms=80.0),
                             timeout_ms=50.0)
        assert not sim.handshake(0, 1).completed


class TestFaultSafety:
    def test_values_stay_in_initial_envelope(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            n = int(rng.integers(2, 9))
            g = random_valid_graph(rng, n)
            s0 = rng.uniform(-10, 10, n)
            links = LinkModel(drop=float(rng.uniform(0, 1)))
            traj = run_lockstep(g, s0, links, rounds=10, seed=int(rng.integers(1e6)))
            arr = traj.as_array()
            assert arr.min() >= s0.min() - 1e-12
            assert arr.max() <= s0.max() + 1e-12

    def test_failed_neighbor_has_zero_weight(self):
        # node 0 reads {0, 1}; with the (0,1) link dead its update must be
        # exactly its own value, not a stale copy of node 1's
        g = build_graph(2, [(0, 0), (0, 1), (1, 0), (1, 1)])
        links = LinkModel(overrides={(0, 1): 1.0, (1, 0): 1.0})
        traj = run_lockstep(g, (0.0, 10.0), links, rounds=3)
        assert (traj.as_array()[:, 0] == 0.0).all()
        assert (traj.as_array()[:, 1] == 10.0).all()


class TestAsync:
    def test_single_node_constant(self):
        g = build_graph(1, [(0, 0)])
        traj = run_async(g, (7.5,), duration_ms=5000, seed=3)
        assert (traj.as_array() == 7.5).all()

    def test_case1_converges_within_envelope(self, case1):
        traj = run_async(case1, S0_CASE1, duration_ms=60_000, seed=1)
        assert spread(traj.final) < 1e-6
        assert 1.0 <= traj.final.min() and traj.final.max() <= 4.0

    def test_case2_erroneously_converges_to_node9(self, case2):
        traj = run_async(case2, np.arange(1.0, 11.0), duration_ms=400_000, seed=1)
        assert np.abs(traj.final - 9.0).max() < 1e-6

    def test_determinism(self, case1):
        a = run_async(case1, S0_CASE1, LinkModel(drop=0.2), 20_000, seed=5).as_array()
        b = run_async(case1, S0_CASE1, LinkModel(drop=0.2), 20_000, seed=5).as_array()
        assert (a == b).all()


class TestAgents:
    def test_phase_cycle_enforced(self, case1):
        sim = MeshSimulation(case1, S0_CASE1)
        agent = sim.agents[0]
        assert agent.phase == NodePhase.IDLE
        with pytest.raises(ValueError):
            agent.advance_phase(NodePhase.UPDATING)

    def test_message_ids_unique(self, case1):
        sim = MeshSimulation(case1, S0_CASE1, LinkModel(drop=0.5), seed=8)
        for _ in range(5):
            sim.lockstep_round()
        ids = list(range(next(sim._msg_ids)))
        assert len(ids) == len(set(ids))


class TestLinkJson:
    def test_round_trip(self):
        links = LinkModel(latency_ms=(5.0, 20.0), drop=0.25,
                          overrides={(0, 1): 1.0, (3, 2): 0.5})
        back = link_model_from_json(link_model_to_json(links))
        assert back == links

    def test_scalar_latency_and_defaults(self):
        links = link_model_from_json('{"latency_ms": 4.0, "drop": 0.1}')
        assert links.latency_ms == 4.0
        assert links.overrides == {}

    def test_validation(self):
        with pytest.raises(ValueError):
            LinkModel(drop=1.5)
        with pytest.raises(ValueError):
            LinkModel(latency_ms=-1.0)
