"""Independent reference implementations the tests check the package against.

Everything here is deliberately brute force and shares no code with the
package: BFS over explicit adjacency for hop distances, DFS enumeration of
all simple paths, and direct grid-cell adjacency counting.
"""

from __future__ import annotations

from collections import deque


def adjacency_from_state(state) -> list[list[int]]:
    """Neighbor lists over edges that still have channel budget."""
    topo = state.topology
    adj: list[list[int]] = [[] for _ in range(topo.n_nodes)]
    for eid, edge in enumerate(topo.edges):
        if state.residual_channels[eid] >= 1:
            adj[edge.u].append(edge.v)
            adj[edge.v].append(edge.u)
    return [sorted(nbrs) for nbrs in adj]


def bfs_hops(adj: list[list[int]], src: int, dst: int) -> int | None:
    """Plain BFS hop count, or None if unreachable."""
    dist = {src: 0}
    queue = deque([src])
    while queue:
        node = queue.popleft()
        if node == dst:
            return dist[node]
        for nbr in adj[node]:
            if nbr not in dist:
                dist[nbr] = dist[node] + 1
                queue.append(nbr)
    return None


def all_simple_paths(adj: list[list[int]], src: int, dst: int) -> list[tuple[int, ...]]:
    """Every simple path from src to dst, sorted by (hop count, node sequence)."""
    paths: list[tuple[int, ...]] = []
    stack = [src]
    on_stack = {src}

    def extend(node: int) -> None:
        if node == dst:
            paths.append(tuple(stack))
            return
        for nbr in adj[node]:
            if nbr in on_stack:
                continue
            stack.append(nbr)
            on_stack.add(nbr)
            extend(nbr)
            stack.pop()
            on_stack.remove(nbr)

    extend(src)
    paths.sort(key=lambda p: (len(p), p))
    return paths


def grid_adjacent_pairs(rows: int, cols: int) -> set[tuple[int, int]]:
    """All horizontally/vertically adjacent cell pairs of a row-major grid."""
    pairs = set()
    for r in range(rows):
        for c in range(cols):
            node = r * cols + c
            if c + 1 < cols:
                pairs.add((node, node + 1))
            if r + 1 < rows:
                pairs.add((node, node + cols))
    return pairs
