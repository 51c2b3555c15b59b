"""Static network graphs: grid generation, adjacency lookups, JSON round-trip.

Nodes are dense integer ids. Grid nodes are indexed row-major, so all
downstream RNG consumption happens in a fixed, reproducible order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

NodeId = int


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass(frozen=True)
class Edge:
    """Undirected channel between two nodes, with a per-episode ebit budget."""

    u: int
    v: int
    channel_capacity: int
    link_fidelity: float

    def other(self, node: int) -> int:
        return self.v if node == self.u else self.u

    def key(self) -> tuple[int, int]:
        return (self.u, self.v) if self.u < self.v else (self.v, self.u)


@dataclass(frozen=True)
class TopologyConfig:
    rows: int
    cols: int
    qubit_capacity_range: tuple[int, int] = (4, 4)
    channel_capacity_range: tuple[int, int] = (26, 35)
    fidelity_range: tuple[float, float] = (0.70, 0.95)

    def validate(self) -> None:
        if self.rows < 1:
            raise ConfigError(f"rows must be >= 1, got {self.rows}")
        if self.cols < 1:
            raise ConfigError(f"cols must be >= 1, got {self.cols}")
        if self.rows * self.cols < 2:
            raise ConfigError("rows*cols must be >= 2 for a usable network")
        lo, hi = self.qubit_capacity_range
        if not (0 <= lo <= hi):
            raise ConfigError(f"qubit_capacity_range must satisfy 0 <= lo <= hi, got {self.qubit_capacity_range}")
        lo, hi = self.channel_capacity_range
        if not (0 <= lo <= hi):
            raise ConfigError(f"channel_capacity_range must satisfy 0 <= lo <= hi, got {self.channel_capacity_range}")
        flo, fhi = self.fidelity_range
        if not (0.0 < flo <= fhi <= 1.0):
            raise ConfigError(f"fidelity_range must satisfy 0 < lo <= hi <= 1, got {self.fidelity_range}")


class Topology:
    """Undirected graph with qubit capacities on nodes and capacities/fidelities on edges.

    Immutable after construction and safe to share read-only across parallel
    episode replications.
    """

    def __init__(self, qubit_capacities, edges: list[Edge]):
        self.qubit_capacities = np.asarray(qubit_capacities, dtype=np.int64)
        if self.qubit_capacities.ndim != 1 or self.qubit_capacities.size < 1:
            raise ConfigError("qubit_capacities must be a non-empty 1-d sequence")
        if np.any(self.qubit_capacities < 0):
            raise ConfigError("qubit capacities must be >= 0")
        self.n_nodes = int(self.qubit_capacities.size)
        self.edges = list(edges)
        self.edge_index: dict[tuple[int, int], int] = {}
        for i, e in enumerate(self.edges):
            if e.u == e.v:
                raise ConfigError(f"self-loop on node {e.u}")
            if not (0 <= e.u < self.n_nodes and 0 <= e.v < self.n_nodes):
                raise ConfigError(f"edge ({e.u},{e.v}) references unknown node")
            if e.channel_capacity < 0:
                raise ConfigError(f"edge ({e.u},{e.v}) has negative channel_capacity")
            if not (0.0 < e.link_fidelity <= 1.0):
                raise ConfigError(f"edge ({e.u},{e.v}) fidelity {e.link_fidelity} outside (0, 1]")
            if e.key() in self.edge_index:
                raise ConfigError(f"duplicate edge ({e.u},{e.v})")
            self.edge_index[e.key()] = i
        self.channel_capacities = np.asarray([e.channel_capacity for e in self.edges], dtype=np.int64)
        self.link_fidelities = np.asarray([e.link_fidelity for e in self.edges], dtype=np.float64)
        # adjacency[v] = ascending list of (neighbor, edge id)
        adjacency: list[list[tuple[int, int]]] = [[] for _ in range(self.n_nodes)]
        for i, e in enumerate(self.edges):
            adjacency[e.u].append((e.v, i))
            adjacency[e.v].append((e.u, i))
        self.adjacency = [sorted(nbrs) for nbrs in adjacency]

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_id(self, u: int, v: int) -> int:
        key = (u, v) if u < v else (v, u)
        try:
            return self.edge_index[key]
        except KeyError:
            raise KeyError(f"no edge between {u} and {v}") from None

    def to_json_dict(self) -> dict:
        return {
            "nodes": [{"id": i, "qubits": int(q)} for i, q in enumerate(self.qubit_capacities)],
            "edges": [
                {"u": e.u, "v": e.v, "capacity": e.channel_capacity, "fidelity": e.link_fidelity}
                for e in self.edges
            ],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "Topology":
        nodes = sorted(doc["nodes"], key=lambda n: n["id"])
        ids = [n["id"] for n in nodes]
        if ids != list(range(len(ids))):
            raise ConfigError("node ids must be dense and contiguous from 0")
        capacities = [n["qubits"] for n in nodes]
        edges = [
            Edge(u=e["u"], v=e["v"], channel_capacity=e["capacity"], link_fidelity=e["fidelity"])
            for e in doc["edges"]
        ]
        return cls(capacities, edges)


def grid_topology(cfg: TopologyConfig, seed: int) -> Topology:
    """Build a rows x cols grid with sampled capacities and link fidelities.

    Node capacities are drawn uniformly (integer-inclusive), edge channel
    capacities likewise, and edge fidelities uniformly on the closed real
    interval. All draws happen in row-major node order and then fixed edge
    order, so a given (cfg, seed) pair is bit-reproducible.
    """
    cfg.validate()
    rng = np.random.default_rng(seed)
    n = cfg.rows * cfg.cols
    qlo, qhi = cfg.qubit_capacity_range
    capacities = rng.integers(qlo, qhi + 1, size=n)
    clo, chi = cfg.channel_capacity_range
    flo, fhi = cfg.fidelity_range
    edges = []
    for r in range(cfg.rows):
        for c in range(cfg.cols):
            node = r * cfg.cols + c
            if c + 1 < cfg.cols:
                edges.append(_sample_edge(node, node + 1, rng, clo, chi, flo, fhi))
            if r + 1 < cfg.rows:
                edges.append(_sample_edge(node, node + cfg.cols, rng, clo, chi, flo, fhi))
    return Topology(capacities, edges)


def _sample_edge(u, v, rng, clo, chi, flo, fhi) -> Edge:
    capacity = int(rng.integers(clo, chi + 1))
    fidelity = float(rng.uniform(flo, fhi))
    return Edge(u=u, v=v, channel_capacity=capacity, link_fidelity=fidelity)


def neighbors(topology: Topology, node: NodeId) -> list[NodeId]:
    """Nodes sharing an edge with `node`, in ascending index order."""
    if not (0 <= node < topology.n_nodes):
        raise KeyError(f"unknown node {node}")
    return [nbr for nbr, _ in topology.adjacency[node]]


def save_topology(topology: Topology, path: str | Path) -> None:
    Path(path).write_text(json.dumps(topology.to_json_dict(), indent=2) + "\n")


def load_topology(path: str | Path) -> Topology:
    return Topology.from_json_dict(json.loads(Path(path).read_text()))
