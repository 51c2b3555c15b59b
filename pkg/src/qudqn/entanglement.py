"""Stochastic physical layer: residual-resource ledger and path attempt model.

An h-hop delivery consumes 1 qubit at each endpoint and 2 at each of the
h - 1 intermediate repeaters (2h total) plus 1 channel unit per edge, and
only when the attempt succeeds end to end; failed attempts consume nothing
and the request simply waits for a later cycle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .topology import Topology

Path = tuple[int, ...]

STAGE_NONE = "none"
STAGE_GENERATION = "generation"
STAGE_SWAP = "swap"


class PathError(ValueError):
    """Path is not a simple path over existing edges of the topology."""


class ContractViolation(RuntimeError):
    """An operation was invoked outside its precondition (mask bug upstream)."""


@dataclass(frozen=True)
class PhysParams:
    """Per-edge generation success, per-repeater swap success, fidelity floor."""

    p_e: float
    q_v: float
    f_min: float

    def __post_init__(self):
        for name in ("p_e", "q_v", "f_min"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class AttemptResult:
    success: bool
    realized_fidelity: float
    qubits_consumed: int
    channels_consumed: int
    failure_stage: str


class NetworkState:
    """Mutable residual-resource ledger over a Topology for one episode.

    Only `attempt_path` mutates residuals, and only on success.
    """

    def __init__(self, topology: Topology, residual_qubits=None, residual_channels=None):
        self.topology = topology
        self.residual_qubits = (
            topology.qubit_capacities.copy() if residual_qubits is None
            else np.asarray(residual_qubits, dtype=np.int64).copy()
        )
        self.residual_channels = (
            topology.channel_capacities.copy() if residual_channels is None
            else np.asarray(residual_channels, dtype=np.int64).copy()
        )

    @classmethod
    def fresh(cls, topology: Topology) -> "NetworkState":
        return cls(topology)

    def copy(self) -> "NetworkState":
        return NetworkState(self.topology, self.residual_qubits, self.residual_channels)

    def consumed_qubits(self) -> int:
        return int((self.topology.qubit_capacities - self.residual_qubits).sum())

    def consumed_channels(self) -> int:
        return int((self.topology.channel_capacities - self.residual_channels).sum())


def path_edge_ids(topology: Topology, path: Path) -> list[int]:
    """Edge ids along a path, validating simplicity and adjacency."""
    if len(path) < 2:
        raise PathError(f"path needs at least 2 nodes, got {list(path)}")
    if len(set(path)) != len(path):
        raise PathError(f"path revisits a node: {list(path)}")
    ids = []
    for u, v in zip(path, path[1:]):
        try:
            ids.append(topology.edge_id(u, v))
        except KeyError:
            raise PathError(f"nodes {u} and {v} are not adjacent") from None
    return ids


def path_fidelity(state: NetworkState, path: Path) -> float:
    """End-to-end fidelity: product of link fidelities along the path."""
    edge_ids = path_edge_ids(state.topology, path)
    return math.prod(float(state.topology.link_fidelities[i]) for i in edge_ids)


def qubit_cost(path: Path) -> int:
    """Total qubits an h-hop delivery consumes: 2h (1+1 endpoints, 2 per intermediate)."""
    return 2 * (len(path) - 1)


def feasible(state: NetworkState, path: Path, params: PhysParams) -> bool:
    """True iff resources suffice at every node/edge and fidelity clears f_min."""
    edge_ids = path_edge_ids(state.topology, path)
    if state.residual_qubits[path[0]] < 1 or state.residual_qubits[path[-1]] < 1:
        return False
    for node in path[1:-1]:
        if state.residual_qubits[node] < 2:
            return False
    for eid in edge_ids:
        if state.residual_channels[eid] < 1:
            return False
    return path_fidelity(state, path) >= params.f_min


def attempt_path(state: NetworkState, path: Path, params: PhysParams,
                 rng: np.random.Generator) -> AttemptResult:
    """Attempt end-to-end entanglement along `path`, deducting resources on success.

    Draws one Bernoulli(p_e) per edge (path order), then one Bernoulli(q_v)
    per intermediate node (path order); the attempt succeeds iff every draw
    does. A failed attempt leaves the ledger untouched.
    """
    if not feasible(state, path, params):
        raise ContractViolation(f"attempt on infeasible path {list(path)}; the action mask must prevent this")
    edge_ids = path_edge_ids(state.topology, path)
    h = len(edge_ids)
    generation_ok = bool(np.all(rng.random(h) < params.p_e))
    swaps_ok = bool(np.all(rng.random(h - 1) < params.q_v))
    if not generation_ok:
        return AttemptResult(False, 0.0, 0, 0, STAGE_GENERATION)
    if not swaps_ok:
        return AttemptResult(False, 0.0, 0, 0, STAGE_SWAP)
    state.residual_qubits[path[0]] -= 1
    state.residual_qubits[path[-1]] -= 1
    for node in path[1:-1]:
        state.residual_qubits[node] -= 2
    for eid in edge_ids:
        state.residual_channels[eid] -= 1
    return AttemptResult(True, path_fidelity(state, path), qubit_cost(path), h, STAGE_NONE)
