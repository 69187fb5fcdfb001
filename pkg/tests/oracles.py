"""Independent reference implementations used by the tests.

None of these import solver internals beyond the ``Graph`` container; they
work from plain edge sets so a bug in the package cannot hide in both places.
"""

from __future__ import annotations

import itertools

import numpy as np


def edge_set(g) -> set[frozenset]:
    return {frozenset((int(u), int(v))) for u, v in g.edges()}


def adjacency_sets(g) -> list[set[int]]:
    adj = [set() for _ in range(g.n)]
    for u, v in g.edges():
        adj[int(u)].add(int(v))
        adj[int(v)].add(int(u))
    return adj


def all_maximum_cliques(adj: list[set[int]], vertices=None) -> tuple[int, set[frozenset]]:
    """Every maximum clique via plain Bron-Kerbosch without pivoting."""
    verts = set(range(len(adj))) if vertices is None else set(vertices)
    best = [0, set()]

    def bk(r, p, x):
        if not p and not x:
            if len(r) > best[0]:
                best[0], best[1] = len(r), {frozenset(r)}
            elif len(r) == best[0]:
                best[1].add(frozenset(r))
            return
        for v in list(p):
            bk(r | {v}, p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    bk(set(), verts, set())
    if best[0] == 0:
        return 0, {frozenset()}
    return best[0], best[1]


def clique_number(adj: list[set[int]]) -> int:
    return all_maximum_cliques(adj)[0]


def naive_core_numbers(adj: list[set[int]]) -> list[int]:
    """Repeated peeling: for k = 0, 1, ... strip vertices of degree < k+1."""
    n = len(adj)
    core = [0] * n
    alive = set(range(n))
    k = 0
    while alive:
        changed = True
        while changed:
            changed = False
            for v in list(alive):
                if len(adj[v] & alive) <= k:
                    core[v] = k
                    alive.discard(v)
                    changed = True
        k += 1
    return core


def is_bipartite(adj: list[set[int]]) -> bool:
    side = [-1] * len(adj)
    for s in range(len(adj)):
        if side[s] >= 0:
            continue
        side[s] = 0
        queue = [s]
        while queue:
            u = queue.pop()
            for w in adj[u]:
                if side[w] < 0:
                    side[w] = 1 - side[u]
                    queue.append(w)
                elif side[w] == side[u]:
                    return False
    return True


def qubo_argmin(dim: int, linear, quad: dict) -> tuple[float, set[frozenset]]:
    """Exhaustive minimum over all 2^dim assignments; returns the argmin as index sets."""
    best = np.inf
    arg: set[frozenset] = set()
    for bits in itertools.product((0, 1), repeat=dim):
        e = sum(linear[i] for i in range(dim) if bits[i])
        e += sum(c for (i, j), c in quad.items() if bits[i] and bits[j])
        if e < best - 1e-9:
            best, arg = e, {frozenset(i for i in range(dim) if bits[i])}
        elif abs(e - best) <= 1e-9:
            arg.add(frozenset(i for i in range(dim) if bits[i]))
    return best, arg


def pairs_within(adj: list[set[int]], subset) -> int:
    s = sorted(subset)
    return sum(1 for a, b in itertools.combinations(s, 2) if b in adj[a])
