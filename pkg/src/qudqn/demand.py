"""Episode request sets: uniform source-destination sampling and status tracking."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .topology import ConfigError, Topology

PENDING = "pending"
RESOLVED = "resolved"
FAILED = "failed-permanent"


@dataclass
class Request:
    id: int
    src: int
    dst: int
    status: str = PENDING
    realized_fidelity: float | None = None

    def mark_resolved(self, fidelity: float) -> None:
        if self.status != PENDING:
            raise ValueError(f"request {self.id} is {self.status}, cannot resolve")
        self.status = RESOLVED
        self.realized_fidelity = fidelity

    def mark_failed(self) -> None:
        if self.status != PENDING:
            raise ValueError(f"request {self.id} is {self.status}, cannot fail")
        self.status = FAILED


@dataclass
class DemandSet:
    requests: list[Request] = field(default_factory=list)

    @property
    def episode_size(self) -> int:
        return len(self.requests)

    @property
    def pending_count(self) -> int:
        return sum(1 for r in self.requests if r.status == PENDING)

    @property
    def resolved_count(self) -> int:
        return sum(1 for r in self.requests if r.status == RESOLVED)

    @property
    def failed_count(self) -> int:
        return sum(1 for r in self.requests if r.status == FAILED)


def generate_demands(topology: Topology, count: int, seed: int) -> DemandSet:
    """Draw `count` requests uniformly over ordered node pairs with src != dst.

    Duplicate (src, dst) pairs across requests are allowed; the draw order is
    fixed so a seed fully determines the request list.
    """
    if count < 1:
        raise ConfigError(f"demand count must be >= 1, got {count}")
    n = topology.n_nodes
    if n < 2:
        raise ConfigError("topology must have at least 2 nodes to generate demands")
    rng = np.random.default_rng(seed)
    requests = []
    for i in range(count):
        src = int(rng.integers(n))
        dst = int(rng.integers(n - 1))
        if dst >= src:
            dst += 1
        requests.append(Request(id=i, src=src, dst=dst))
    return DemandSet(requests)


def pending(demands: DemandSet) -> list[Request]:
    """Pending requests in id order."""
    return [r for r in demands.requests if r.status == PENDING]
