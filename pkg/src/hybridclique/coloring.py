"""DSATUR greedy colouring; its colour count is an upper bound on the clique number."""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .graph import Graph, induced_subgraph


@dataclass(frozen=True)
class ColoringResult:
    colors_used: int
    assignment: np.ndarray


def dsatur_color(g: Graph) -> ColoringResult:
    """Colour ``g`` with DSATUR.

    Picks the uncoloured vertex with the most distinct neighbour colours,
    breaking ties by larger degree and then smaller index, and gives it the
    smallest colour absent from its neighbourhood.
    """
    n = g.n
    color = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return ColoringResult(0, color)
    deg = g.degrees().tolist()
    seen: list[set[int]] = [set() for _ in range(n)]
    heap = [(0, -deg[v], v) for v in range(n)]
    heapq.heapify(heap)
    used = 0
    done = 0
    while done < n:
        neg_sat, _, v = heapq.heappop(heap)
        if color[v] >= 0 or -neg_sat != len(seen[v]):
            continue  # stale entry
        taken = seen[v]
        c = 0
        while c in taken:
            c += 1
        color[v] = c
        used = max(used, c + 1)
        done += 1
        for u in g.neighbors(v).tolist():
            if color[u] < 0 and c not in seen[u]:
                seen[u].add(c)
                heapq.heappush(heap, (-len(seen[u]), -deg[u], u))
    return ColoringResult(used, color)


def dsatur_color_count(g: Graph, vertices=None) -> int:
    """Colours DSATUR needs for ``g`` or for ``G[vertices]``."""
    if vertices is not None:
        g, _ = induced_subgraph(g, vertices)
    return dsatur_color(g).colors_used
