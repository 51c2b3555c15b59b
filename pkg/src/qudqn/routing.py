"""Path discovery over the residual graph and the two baseline schedulers.

Edges with exhausted channel budget drop out of the search graph, so
candidate paths always reflect what the network can still carry. All hop
ties break on the lexicographically smallest node sequence, which keeps
every downstream consumer (masks, replay, benchmarks) reproducible.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass

import numpy as np

from .demand import DemandSet, Request, pending
from .entanglement import NetworkState, Path, PhysParams, attempt_path, feasible

# mask[slot, path_slot]; flattened row-major this is the agent's action id space
ActionMask = np.ndarray


@dataclass
class CandidateSet:
    """Per request slot, up to k candidate paths over the current residual graph."""

    paths: list[list[Path]]
    k: int

    def __getitem__(self, slot: int) -> list[Path]:
        return self.paths[slot]


def residual_adjacency(state: NetworkState) -> list[list[int]]:
    """Ascending neighbor lists restricted to edges with residual channels."""
    topo = state.topology
    adj: list[list[int]] = [[] for _ in range(topo.n_nodes)]
    for nbrs, out in zip(topo.adjacency, adj):
        out.extend(nbr for nbr, eid in nbrs if state.residual_channels[eid] >= 1)
    return adj


def _lex_shortest(adj: list[list[int]], src: int, dst: int,
                  blocked_nodes: frozenset[int] = frozenset(),
                  blocked_edges: frozenset[tuple[int, int]] = frozenset()) -> Path | None:
    """Minimum-hop path with the lexicographically smallest node sequence.

    BFS from dst gives hop counts; a greedy walk from src that always picks
    the smallest-index neighbor one hop closer to dst realizes the lex-min
    shortest path.
    """
    dist = {dst: 0}
    queue = deque([dst])
    while queue:
        node = queue.popleft()
        for nbr in adj[node]:
            if nbr in blocked_nodes or nbr in dist:
                continue
            key = (node, nbr) if node < nbr else (nbr, node)
            if key in blocked_edges:
                continue
            dist[nbr] = dist[node] + 1
            queue.append(nbr)
    if src not in dist or src in blocked_nodes:
        return None
    path = [src]
    node = src
    while node != dst:
        step = dist[node] - 1
        for nbr in adj[node]:
            if dist.get(nbr) != step or nbr in blocked_nodes:
                continue
            key = (node, nbr) if node < nbr else (nbr, node)
            if key in blocked_edges:
                continue
            path.append(nbr)
            node = nbr
            break
    return tuple(path)


def shortest_path(state: NetworkState, src: int, dst: int) -> Path | None:
    """Minimum-hop simple path over edges with residual channels, or None."""
    if src == dst:
        raise ValueError("src and dst must differ")
    return _lex_shortest(residual_adjacency(state), src, dst)


def _k_shortest(adj: list[list[int]], src: int, dst: int, k: int) -> list[Path]:
    """Yen-style loopless enumeration in (hop count, node sequence) order."""
    first = _lex_shortest(adj, src, dst)
    if first is None:
        return []
    accepted = [first]
    pool: list[tuple[int, Path]] = []
    seen = {first}
    while len(accepted) < k:
        prev = accepted[-1]
        for i in range(len(prev) - 1):
            root = prev[: i + 1]
            spur = prev[i]
            blocked_nodes = frozenset(root[:-1])
            removed = set()
            for p in accepted:
                if p[: i + 1] == root:
                    a, b = p[i], p[i + 1]
                    removed.add((a, b) if a < b else (b, a))
            spur_path = _lex_shortest(adj, spur, dst, blocked_nodes, frozenset(removed))
            if spur_path is None:
                continue
            candidate = root[:-1] + spur_path
            if candidate not in seen:
                seen.add(candidate)
                heapq.heappush(pool, (len(candidate) - 1, candidate))
        if not pool:
            break
        _, best = heapq.heappop(pool)
        accepted.append(best)
    return accepted


def k_shortest_paths(state: NetworkState, src: int, dst: int, k: int) -> list[Path]:
    """Up to k loopless paths in nondecreasing hop count; first equals shortest_path."""
    if src == dst:
        raise ValueError("src and dst must differ")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return _k_shortest(residual_adjacency(state), src, dst, k)


def compute_candidates(state: NetworkState, demands: DemandSet, k: int) -> CandidateSet:
    """Per request slot, the current k-shortest candidates (empty if not pending)."""
    adj = residual_adjacency(state)
    paths = [
        _k_shortest(adj, r.src, r.dst, k) if r.status == "pending" else []
        for r in demands.requests
    ]
    return CandidateSet(paths=paths, k=k)


def build_action_mask(state: NetworkState, demands: DemandSet,
                      candidates: CandidateSet, params: PhysParams) -> ActionMask:
    """mask[slot, j] is True iff request `slot` is pending and candidate j is feasible.

    An all-false mask means no action can make progress and the episode must
    terminate.
    """
    mask = np.zeros((demands.episode_size, candidates.k), dtype=bool)
    for slot, request in enumerate(demands.requests):
        if request.status != "pending":
            continue
        for j, path in enumerate(candidates[slot]):
            mask[slot, j] = feasible(state, path, params)
    return mask


def _attempt_request(state: NetworkState, request: Request, params: PhysParams,
                     rng: np.random.Generator) -> Path | None:
    """Route one request over its current shortest path if that path is feasible."""
    path = shortest_path(state, request.src, request.dst)
    if path is None or not feasible(state, path, params):
        return None
    result = attempt_path(state, path, params, rng)
    if result.success:
        request.mark_resolved(result.realized_fidelity)
    return path


def policy_shortest(state: NetworkState, demands: DemandSet, params: PhysParams,
                    rng: np.random.Generator) -> list[tuple[Request, Path]]:
    """One greedy pass: pending requests in id order, each via its shortest path.

    Requests whose shortest available path is infeasible are skipped; the
    returned schedule lists the attempts actually made (successful or not).
    """
    schedule = []
    for request in pending(demands):
        path = _attempt_request(state, request, params, rng)
        if path is not None:
            schedule.append((request, path))
    return schedule


def policy_random(state: NetworkState, demands: DemandSet, params: PhysParams,
                  rng: np.random.Generator) -> list[tuple[Request, Path]]:
    """Like policy_shortest but serves pending requests in uniform random order."""
    requests = pending(demands)
    order = rng.permutation(len(requests))
    schedule = []
    for idx in order:
        request = requests[int(idx)]
        path = _attempt_request(state, request, params, rng)
        if path is not None:
            schedule.append((request, path))
    return schedule
