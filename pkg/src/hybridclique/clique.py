"""Exact maximum clique by branch and bound, plus a greedy lower bound.

The search kernel works on adjacency bitsets stored as Python integers.  A
node holds the growing clique ``C`` and the candidate set ``P`` (common
neighbours of ``C``); ``P`` is covered by colour classes and a vertex in the
``j``-th class cannot extend ``C`` by more than ``j`` vertices, which gives the
pruning bound.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

import numpy as np

from .graph import Graph, induced_subgraph
from .kcore import core_decompose, enumerate_subproblems

BITSET_LIMIT = 4096


@dataclass(frozen=True)
class Clique:
    vertices: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.vertices)

    @classmethod
    def of(cls, vertices) -> "Clique":
        return cls(tuple(sorted(int(v) for v in vertices)))

    def labels(self, g: Graph) -> list:
        return [g.label(v) for v in self.vertices]


def is_clique(g: Graph, vertices) -> bool:
    vs = [int(v) for v in vertices]
    return all(g.has_edge(u, v) for i, u in enumerate(vs) for v in vs[i + 1 :])


@dataclass(frozen=True)
class BnbConfig:
    initial_lower_bound: int = 0  # only cliques larger than this are sought
    node_limit: int | None = None
    use_coloring_bound: bool = True
    recolor_shrink: float = 0.25


@dataclass
class BnbStats:
    nodes: int = 0
    prunes: int = 0
    colorings: int = 0
    optimal: bool = True

    def add(self, other: "BnbStats") -> None:
        self.nodes += other.nodes
        self.prunes += other.prunes
        self.colorings += other.colorings
        self.optimal = self.optimal and other.optimal


class _NodeLimit(Exception):
    pass


def _color_classes(P: int, adj: list[int]) -> list[int]:
    # sequential greedy colouring, vertices visited by increasing bit index
    classes = []
    while P:
        Q = P
        cls = 0
        while Q:
            low = Q & -Q
            cls |= low
            Q &= ~(adj[low.bit_length() - 1] | low)
        classes.append(cls)
        P &= ~cls
    return classes


def _singletons(P: int) -> list[int]:
    out = []
    while P:
        low = P & -P
        out.append(low)
        P ^= low
    return out


class _Search:
    def __init__(self, adj: list[int], lower: int, cfg: BnbConfig):
        self.adj = adj
        self.best_size = lower
        self.best: list[int] | None = None
        self.cfg = cfg
        self.keep = 1.0 - cfg.recolor_shrink
        self.stats = BnbStats()

    def cover(self, P: int) -> list[int]:
        if not self.cfg.use_coloring_bound:
            return _singletons(P)
        self.stats.colorings += 1
        return _color_classes(P, self.adj)

    def run(self, P: int) -> None:
        if P.bit_count() <= self.best_size:
            return
        self.expand([], P, self.cover(P), P.bit_count())

    def expand(self, C: list[int], P: int, classes: list[int], colored: int) -> None:
        stats = self.stats
        stats.nodes += 1
        if self.cfg.node_limit is not None and stats.nodes > self.cfg.node_limit:
            raise _NodeLimit
        adj = self.adj
        for j in range(len(classes) - 1, -1, -1):
            if len(C) + j + 1 <= self.best_size:
                stats.prunes += 1
                return
            cls = classes[j] & P
            while cls:
                low = cls & -cls
                cls ^= low
                v = low.bit_length() - 1
                NP = P & adj[v]
                C.append(v)
                if not NP:
                    if len(C) > self.best_size:
                        self.best_size = len(C)
                        self.best = list(C)
                else:
                    k = NP.bit_count()
                    if len(C) + k > self.best_size:
                        if not self.cfg.use_coloring_bound or k <= self.keep * colored:
                            self.expand(C, NP, self.cover(NP), k)
                        else:
                            sub = [c & NP for c in classes[: j + 1]]
                            self.expand(C, NP, [c for c in sub if c], colored)
                    else:
                        stats.prunes += 1
                C.pop()
                P ^= low


def _solve_bitset(g: Graph, lower: int, cfg: BnbConfig) -> tuple[list[int] | None, BnbStats]:
    n = g.n
    if n <= lower:
        return None, BnbStats()
    # bit i is the i-th vertex from the back of the degeneracy order, so the
    # colouring sees the densest part first
    order = core_decompose(g).order[::-1]
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    adj = [0] * n
    for i, v in enumerate(order.tolist()):
        row = 0
        for u in rank[g.neighbors(v)].tolist():
            row |= 1 << u
        adj[i] = row
    search = _Search(adj, lower, cfg)
    limit = sys.getrecursionlimit()
    if n + 100 > limit:
        sys.setrecursionlimit(n + 100)
    try:
        search.run((1 << n) - 1)
    except _NodeLimit:
        search.stats.optimal = False
    finally:
        sys.setrecursionlimit(limit)
    if search.best is None:
        return None, search.stats
    return [int(order[i]) for i in search.best], search.stats


def max_clique_exact(g: Graph, cfg: BnbConfig | None = None) -> tuple[Clique | None, BnbStats]:
    """Maximum clique of ``g`` if it is larger than ``cfg.initial_lower_bound``.

    Returns ``(None, stats)`` when no larger clique exists.  When the node
    limit stops the search, the best clique seen is returned and
    ``stats.optimal`` is False.  Graphs above ``BITSET_LIMIT`` vertices are
    first split into root/later-neighbour subproblems.
    """
    cfg = cfg or BnbConfig()
    if cfg.initial_lower_bound < 0:
        raise ValueError("initial_lower_bound must be nonnegative")
    if g.n <= BITSET_LIMIT:
        found, stats = _solve_bitset(g, cfg.initial_lower_bound, cfg)
        return (Clique.of(found) if found is not None else None), stats

    stats = BnbStats()
    best_size = cfg.initial_lower_bound
    best: list[int] | None = None
    for sub in enumerate_subproblems(g, core_decompose(g)):
        if sub.offset + sub.size <= best_size:
            continue
        h, mapping = induced_subgraph(g, sub.candidates)
        found, st = _solve_bitset(h, best_size - sub.offset, cfg)
        stats.add(st)
        if found is not None:
            best = list(sub.fixed) + [int(mapping[v]) for v in found]
            best_size = len(best)
    return (Clique.of(best) if best is not None else None), stats


def greedy_clique_heuristic(g: Graph, seed: int = 0) -> Clique:
    """A maximal clique built greedily.

    Starting from all vertices, repeatedly add the candidate with the most
    neighbours among the remaining candidates and keep only its neighbours.
    ``seed`` only decides between equal degrees.
    """
    if g.n == 0:
        return Clique(())
    priority = np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF).permutation(g.n)
    clique: list[int] = []
    degs = g.degrees()
    cand = np.arange(g.n)
    while len(cand):
        pick = int(np.lexsort((priority[cand], degs))[-1])
        v = int(cand[pick])
        clique.append(v)
        nbrs = g.neighbors(v)
        if len(clique) > 1:
            nbrs = np.intersect1d(nbrs, cand, assume_unique=True)
        if len(nbrs) == 0:
            break
        h, cand = induced_subgraph(g, nbrs)
        degs = h.degrees()
        cand = cand.astype(np.int64)
    return Clique.of(clique)
