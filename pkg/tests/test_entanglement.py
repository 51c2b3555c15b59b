import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qudqn.entanglement import (
    ContractViolation,
    NetworkState,
    PathError,
    PhysParams,
    STAGE_GENERATION,
    STAGE_NONE,
    attempt_path,
    feasible,
    path_fidelity,
    qubit_cost,
)
from qudqn.topology import Edge, Topology, TopologyConfig, grid_topology


def line_topology(fidelities, qubits=10, channels=10):
    """Path graph 0-1-...-n with the given link fidelities."""
    n = len(fidelities) + 1
    edges = [Edge(i, i + 1, channels, f) for i, f in enumerate(fidelities)]
    return Topology([qubits] * n, edges)


def test_path_fidelity_single_edge():
    state = NetworkState.fresh(line_topology([0.8]))
    assert path_fidelity(state, (0, 1)) == 0.8


def test_path_fidelity_two_edges():
    state = NetworkState.fresh(line_topology([0.9, 0.9]))
    assert path_fidelity(state, (0, 1, 2)) == pytest.approx(0.81, abs=1e-12)


def test_path_fidelity_three_edges():
    state = NetworkState.fresh(line_topology([0.95, 0.95, 0.95]))
    assert path_fidelity(state, (0, 1, 2, 3)) == pytest.approx(0.857375, abs=1e-12)


def test_path_fidelity_rejects_bad_paths():
    state = NetworkState.fresh(line_topology([0.9, 0.9]))
    with pytest.raises(PathError):
        path_fidelity(state, (0, 2))  # not adjacent
    with pytest.raises(PathError):
        path_fidelity(state, (0, 1, 0))  # revisits a node
    with pytest.raises(PathError):
        path_fidelity(state, (0,))


@pytest.mark.parametrize("hops", [1, 3, 5])
def test_qubit_cost_matches_per_node_deduction(hops):
    path = tuple(range(hops + 1))
    # 1 qubit at each endpoint, 2 at each intermediate
    per_node = 1 + 2 * (len(path) - 2) + 1
    assert qubit_cost(path) == per_node == 2 * hops


def test_feasible_fidelity_gate():
    topo = line_topology([0.95, 0.95], qubits=4)
    state = NetworkState.fresh(topo)
    assert feasible(state, (0, 1, 2), PhysParams(0.9, 0.9, 0.85))  # 0.9025 >= 0.85
    assert not feasible(state, (0, 1, 2), PhysParams(0.9, 0.9, 0.95))  # 0.9025 < 0.95


def test_feasible_needs_two_qubits_at_intermediate():
    topo = line_topology([0.95, 0.95], qubits=4)
    state = NetworkState.fresh(topo)
    state.residual_qubits[1] = 1
    assert not feasible(state, (0, 1, 2), PhysParams(0.9, 0.9, 0.5))


def test_feasible_needs_channel_budget():
    topo = line_topology([0.95, 0.95])
    state = NetworkState.fresh(topo)
    state.residual_channels[1] = 0
    assert not feasible(state, (0, 1, 2), PhysParams(0.9, 0.9, 0.5))


def test_attempt_certain_success_consumes_resources():
    topo = line_topology([0.9, 0.9, 0.9], qubits=5)
    state = NetworkState.fresh(topo)
    result = attempt_path(state, (0, 1, 2, 3), PhysParams(1.0, 1.0, 0.5),
                          np.random.default_rng(0))
    assert result.success
    assert result.qubits_consumed == 6
    assert result.channels_consumed == 3
    assert result.failure_stage == STAGE_NONE
    assert list(state.residual_qubits) == [4, 3, 3, 4]
    assert list(state.residual_channels) == [9, 9, 9]
    assert state.consumed_qubits() == 6


def test_attempt_certain_failure_consumes_nothing():
    topo = line_topology([0.9, 0.9])
    state = NetworkState.fresh(topo)
    result = attempt_path(state, (0, 1, 2), PhysParams(0.0, 1.0, 0.5),
                          np.random.default_rng(0))
    assert not result.success
    assert result.failure_stage == STAGE_GENERATION
    assert result.qubits_consumed == 0 and result.channels_consumed == 0
    assert state.consumed_qubits() == 0 and state.consumed_channels() == 0


def test_attempt_failure_leaves_state_bit_identical():
    topo = grid_topology(TopologyConfig(rows=3, cols=3, fidelity_range=(0.9, 0.95)), seed=5)
    state = NetworkState.fresh(topo)
    params = PhysParams(0.3, 0.3, 0.5)
    rng = np.random.default_rng(1)
    failures = 0
    for _ in range(200):
        if not feasible(state, (0, 1, 2), params):
            break
        before_q = state.residual_qubits.copy()
        before_c = state.residual_channels.copy()
        result = attempt_path(state, (0, 1, 2), params, rng)
        if not result.success:
            failures += 1
            assert np.array_equal(state.residual_qubits, before_q)
            assert np.array_equal(state.residual_channels, before_c)
    assert failures > 0


def test_attempt_on_infeasible_path_is_contract_violation():
    topo = line_topology([0.9])
    state = NetworkState.fresh(topo)
    state.residual_qubits[0] = 0
    with pytest.raises(ContractViolation):
        attempt_path(state, (0, 1), PhysParams(1.0, 1.0, 0.5), np.random.default_rng(0))


def test_two_hop_success_rate_matches_closed_form():
    # success probability p_e^2 * q_v = 0.9^2 * 0.9 = 0.729
    topo = line_topology([0.95, 0.95], qubits=10 ** 6, channels=10 ** 6)
    state = NetworkState.fresh(topo)
    params = PhysParams(0.9, 0.9, 0.85)
    rng = np.random.default_rng(2024)
    trials = 100_000
    wins = sum(attempt_path(state, (0, 1, 2), params, rng).success for _ in range(trials))
    assert abs(wins / trials - 0.729) <= 0.01


@pytest.mark.parametrize("hops", [1, 3, 4])
def test_h_hop_success_rate_within_3_sigma(hops):
    p_e, q_v = 0.85, 0.8
    expected = p_e ** hops * q_v ** (hops - 1)
    topo = line_topology([0.95] * hops, qubits=10 ** 7, channels=10 ** 7)
    state = NetworkState.fresh(topo)
    params = PhysParams(p_e, q_v, 0.0)
    rng = np.random.default_rng(hops)
    trials = 20_000
    path = tuple(range(hops + 1))
    wins = sum(attempt_path(state, path, params, rng).success for _ in range(trials))
    sigma = np.sqrt(expected * (1 - expected) / trials)
    assert abs(wins / trials - expected) <= 3 * sigma


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_random_attempt_streams_conserve_resources(seed):
    topo = grid_topology(TopologyConfig(rows=3, cols=3, qubit_capacity_range=(2, 5),
                                        channel_capacity_range=(1, 4),
                                        fidelity_range=(0.8, 0.95)), seed=7)
    state = NetworkState.fresh(topo)
    params = PhysParams(0.7, 0.7, 0.5)
    rng = np.random.default_rng(seed)
    two_hop_paths = [(0, 1, 2), (0, 3, 6), (2, 5, 8), (6, 7, 8), (1, 4, 7), (3, 4, 5)]
    consumed = 0
    for _ in range(60):
        path = two_hop_paths[int(rng.integers(len(two_hop_paths)))]
        if not feasible(state, path, params):
            continue
        result = attempt_path(state, path, params, rng)
        if result.success:
            consumed += result.qubits_consumed
    assert np.all(state.residual_qubits >= 0)
    assert np.all(state.residual_channels >= 0)
    assert np.all(state.residual_qubits <= topo.qubit_capacities)
    assert state.consumed_qubits() == consumed
    assert consumed <= int(topo.qubit_capacities.sum())


def test_phys_params_validation():
    with pytest.raises(ValueError, match="p_e"):
        PhysParams(1.2, 0.9, 0.85)
    with pytest.raises(ValueError, match="f_min"):
        PhysParams(0.9, 0.9, -0.1)
