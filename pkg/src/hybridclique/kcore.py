"""Core numbers, degeneracy ordering and the root/later-neighbour decomposition."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numba as nb
import numpy as np

from .graph import INDEX_DTYPE, Graph


@dataclass(frozen=True)
class CoreDecomposition:
    order: np.ndarray  # vertices in peeling order
    core: np.ndarray  # core number per vertex
    k_graph: int
    position: np.ndarray  # inverse of ``order``

    def later_neighbors(self, g: Graph, v: int) -> np.ndarray:
        nbrs = g.neighbors(v)
        return nbrs[self.position[nbrs] > self.position[v]]


@dataclass(frozen=True)
class Subproblem:
    """A clique search restricted to ``{root} | candidates``.

    ``prefix`` holds roots fixed by enclosing decomposition levels; every
    clique found here is extended by them.  Vertex ids refer to the graph the
    whole decomposition started from.
    """

    root: int | None
    candidates: np.ndarray
    kcore_bound: int
    level: int = 1
    prefix: tuple[int, ...] = ()
    color_bound: int | None = None

    @property
    def offset(self) -> int:
        """Clique vertices implied before searching the candidates."""
        return len(self.prefix) + (self.root is not None)

    @property
    def size(self) -> int:
        return len(self.candidates)

    @property
    def upper_bound(self) -> int:
        inner = min(self.size, self.kcore_bound)
        if self.color_bound is not None:
            inner = min(inner, self.color_bound)
        return self.offset + inner

    @property
    def fixed(self) -> tuple[int, ...]:
        return self.prefix if self.root is None else self.prefix + (self.root,)


@nb.njit(cache=True)
def _heap_less(key, a, b):
    return key[a] < key[b] or (key[a] == key[b] and a < b)


@nb.njit(cache=True)
def _sift_up(heap, where, key, i):
    v = heap[i]
    while i > 0:
        parent = (i - 1) >> 1
        w = heap[parent]
        if not _heap_less(key, v, w):
            break
        heap[i] = w
        where[w] = i
        i = parent
    heap[i] = v
    where[v] = i


@nb.njit(cache=True)
def _sift_down(heap, where, key, i, size):
    v = heap[i]
    while True:
        c = 2 * i + 1
        if c >= size:
            break
        if c + 1 < size and _heap_less(key, heap[c + 1], heap[c]):
            c += 1
        w = heap[c]
        if not _heap_less(key, w, v):
            break
        heap[i] = w
        where[w] = i
        i = c
    heap[i] = v
    where[v] = i


@nb.njit(cache=True)
def _peel(indptr, indices):
    n = len(indptr) - 1
    key = np.empty(n, dtype=np.int64)
    for v in range(n):
        key[v] = indptr[v + 1] - indptr[v]
    heap = np.arange(n)
    where = np.arange(n)
    for i in range(n // 2 - 1, -1, -1):
        _sift_down(heap, where, key, i, n)
    removed = np.zeros(n, dtype=np.bool_)
    order = np.empty(n, dtype=np.int64)
    size = n
    for t in range(n):
        v = heap[0]
        size -= 1
        if size > 0:
            heap[0] = heap[size]
            where[heap[0]] = 0
            _sift_down(heap, where, key, 0, size)
        removed[v] = True
        order[t] = v
        kv = key[v]
        for e in range(indptr[v], indptr[v + 1]):
            u = indices[e]
            if not removed[u] and key[u] > kv:
                key[u] -= 1
                _sift_up(heap, where, key, where[u])
    return order, key


def core_decompose(g: Graph) -> CoreDecomposition:
    """Peel minimum-core vertices one at a time.

    Ties on the current core value go to the smallest vertex index, so the
    ordering is fully determined by the graph.  Uses an indexed binary heap:
    O((n + m) log n).
    """
    order, core = _peel(g.indptr, g.indices)
    order = order.astype(INDEX_DTYPE)
    position = np.empty(g.n, dtype=np.int64)
    position[order] = np.arange(g.n)
    k = int(core.max()) if g.n else 0
    for a in (order, core, position):
        a.setflags(write=False)
    return CoreDecomposition(order, core, k, position)


def enumerate_subproblems(
    g: Graph, cd: CoreDecomposition, level: int = 1
) -> Iterator[Subproblem]:
    """Yield the ``n - K(G) + 1`` subproblems covering every clique of ``g``.

    The first item is the seed block (the last ``K(G)`` vertices of the
    ordering, no root).  Then each earlier vertex ``w``, from the back of the
    ordering to the front, with its neighbours that come after it.
    """
    n, k = g.n, cd.k_graph
    seed = np.sort(cd.order[n - k :]) if k else np.empty(0, dtype=INDEX_DTYPE)
    yield Subproblem(None, seed.astype(INDEX_DTYPE), k, level)
    for i in range(n - k - 1, -1, -1):
        w = int(cd.order[i])
        yield Subproblem(w, cd.later_neighbors(g, w), int(cd.core[w]), level)
