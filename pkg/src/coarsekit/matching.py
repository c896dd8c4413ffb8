"""
Maximum bipartite matching (Hopcroft-Karp) with Hall-violator extraction.

Left vertices are 0..n_left-1, right vertices 0..n_right-1, and `adj[u]`
lists the right neighbours of u. Unmatched slots are -1.
"""

from __future__ import annotations

from collections import deque
from typing import Sequence

__all__ = ["hopcroft_karp", "hall_violator"]

_INF = float("inf")


def hopcroft_karp(adj: Sequence[Sequence[int]], n_right: int) -> tuple[list[int], list[int]]:
    """Return (match_left, match_right) for a maximum matching."""
    n_left = len(adj)
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    dist = [0.0] * n_left

    def bfs() -> bool:
        queue = deque()
        for u in range(n_left):
            if match_l[u] == -1:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = _INF
        found = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w == -1:
                    found = True
                elif dist[w] == _INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found

    def dfs(root: int) -> bool:
        # iterative layered DFS; avoids recursion limits on long augmenting paths
        stack = [(root, iter(adj[root]))]
        path = []
        while stack:
            u, it = stack[-1]
            advanced = False
            for v in it:
                w = match_r[v]
                if w == -1:
                    path.append((u, v))
                    for a, b in path:
                        match_l[a] = b
                        match_r[b] = a
                    return True
                if dist[w] == dist[u] + 1:
                    path.append((u, v))
                    stack.append((w, iter(adj[w])))
                    advanced = True
                    break
            if not advanced:
                dist[u] = _INF
                stack.pop()
                if path:
                    path.pop()
        return False

    while bfs():
        for u in range(n_left):
            if match_l[u] == -1:
                dfs(u)
    return match_l, match_r


def hall_violator(adj: Sequence[Sequence[int]], match_l: Sequence[int], match_r: Sequence[int]) -> tuple[list[int], list[int]]:
    """Alternating-reachability cut of a maximum matching.

    Returns (W, N(W)) where W is the set of left vertices reachable from
    unmatched left vertices by alternating paths. For a maximum matching
    with k unmatched left vertices, |N(W)| = |W| - k, so W violates Hall's
    condition whenever k > 0.
    """
    seen_l = {u for u in range(len(adj)) if match_l[u] == -1}
    seen_r: set[int] = set()
    queue = deque(seen_l)
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v in seen_r:
                continue
            seen_r.add(v)
            w = match_r[v]
            if w != -1 and w not in seen_l:
                seen_l.add(w)
                queue.append(w)
    return sorted(seen_l), sorted(seen_r)
