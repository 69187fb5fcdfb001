"""Compressed undirected graphs, file readers and random instances.

Vertices are dense 0-based ``int32`` indices.  Original identifiers read from
files are kept in ``Graph.labels`` and only used for reporting.
"""

from __future__ import annotations

import gzip
import io
import logging
import math
from dataclasses import dataclass
from typing import IO, Iterable, NamedTuple, Sequence

import numpy as np

log = logging.getLogger(__name__)

INDEX_DTYPE = np.int32
MAX_VERTICES = int(np.iinfo(INDEX_DTYPE).max)
FORMATS = ("snap", "mtx", "dimacs")
ISOLATED_TAG = "# isolated:"


class ParseError(ValueError):
    """Raised for malformed graph files; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class ParseSummary:
    lines: int
    raw_edges: int
    self_loops: int
    duplicates: int
    ignored_weights: int = 0


class Graph:
    """Immutable simple undirected graph in CSR form.

    ``indptr`` has length ``n + 1`` and ``indices[indptr[v]:indptr[v + 1]]`` is
    the strictly increasing neighbour list of ``v``.
    """

    __slots__ = ("indptr", "indices", "labels", "parse_summary", "_bitsets", "_degrees")

    def __init__(self, indptr: np.ndarray, indices: np.ndarray, labels: Sequence | None = None):
        indptr = np.asarray(indptr, dtype=np.int64)
        indices = np.asarray(indices, dtype=INDEX_DTYPE)
        if indptr.ndim != 1 or len(indptr) == 0 or indptr[0] != 0 or indptr[-1] != len(indices):
            raise ValueError("malformed CSR arrays")
        if labels is not None and len(labels) != len(indptr) - 1:
            raise ValueError("labels must have one entry per vertex")
        indptr.setflags(write=False)
        indices.setflags(write=False)
        self.indptr = indptr
        self.indices = indices
        self.labels = tuple(labels) if labels is not None else None
        self.parse_summary: ParseSummary | None = None
        self._bitsets: list[int] | None = None
        self._degrees: np.ndarray | None = None

    @classmethod
    def from_edges(cls, n: int, edges, labels: Sequence | None = None) -> "Graph":
        """Build a simple graph from an ``(k, 2)`` array of endpoints.

        Self-loops are dropped, direction is ignored and repeated pairs are
        merged.
        """
        g, _, _ = _build(n, edges, labels)
        return g

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def m(self) -> int:
        return len(self.indices) // 2

    def degrees(self) -> np.ndarray:
        if self._degrees is None:
            d = np.diff(self.indptr)
            d.setflags(write=False)
            self._degrees = d
        return self._degrees

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = int(np.searchsorted(nb, v))
        return i < len(nb) and nb[i] == v

    def edges(self) -> np.ndarray:
        """Edge array of shape ``(m, 2)`` with ``u < v``, lexicographically sorted."""
        src = np.repeat(np.arange(self.n, dtype=INDEX_DTYPE), self.degrees())
        keep = src < self.indices
        return np.stack([src[keep], self.indices[keep]], axis=1)

    def bitsets(self) -> list[int]:
        """Adjacency rows as Python integers (bit ``u`` of row ``v`` set iff uv is an edge)."""
        if self._bitsets is None:
            rows = []
            for v in range(self.n):
                row = 0
                for u in self.neighbors(v).tolist():
                    row |= 1 << u
                rows.append(row)
            self._bitsets = rows
        return self._bitsets

    def label(self, v: int):
        return self.labels[v] if self.labels is not None else v

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def _build(n: int, edges, labels=None) -> tuple[Graph, int, int]:
    if n < 0:
        raise ValueError("vertex count must be nonnegative")
    if n > MAX_VERTICES:
        raise ValueError(f"vertex count {n} exceeds the 32-bit index range")
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if len(e) and (e.min() < 0 or e.max() >= n):
        raise ValueError("edge endpoint out of range")
    loops = e[:, 0] == e[:, 1]
    n_loops = int(loops.sum())
    e = e[~loops]
    lo = np.minimum(e[:, 0], e[:, 1])
    hi = np.maximum(e[:, 0], e[:, 1])
    key = np.unique(lo * n + hi) if len(e) else np.empty(0, dtype=np.int64)
    duplicates = len(e) - len(key)
    lo, hi = key // max(n, 1), key % max(n, 1)
    src = np.concatenate([lo, hi])
    dst = np.concatenate([hi, lo])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return Graph(indptr, dst.astype(INDEX_DTYPE), labels), n_loops, duplicates


# ---------------------------------------------------------------------------
# readers / writers


def parse_edge_list(stream: IO[str] | Iterable[str], format: str = "snap") -> Graph:
    """Read a graph from a text stream.

    ``snap``: ``#`` comments then whitespace separated ``u v`` pairs; ids may be
    arbitrary tokens and are numbered in order of first appearance.
    ``mtx``: Matrix Market coordinate file; vertex ``i`` becomes index ``i - 1``.
    ``dimacs``: ``p edge n m`` header and ``e u v`` lines, 1-based.

    The result is always simple and undirected.  Extra columns (weights) are
    ignored with a warning.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")
    reader = {"snap": _read_snap, "mtx": _read_mtx, "dimacs": _read_dimacs}[format]
    n, edges, labels, lines, weights = reader(stream)
    g, loops, dups = _build(n, edges, labels)
    g.parse_summary = ParseSummary(lines, len(edges), loops, dups, weights)
    if loops or dups:
        log.info("normalized input: dropped %d self-loops and %d duplicate/reverse edges", loops, dups)
    if weights:
        log.warning("ignored %d weight entries (weighted cliques are not supported)", weights)
    return g


def _read_snap(stream):
    ids: dict[str, int] = {}
    src: list[int] = []
    dst: list[int] = []
    weights = 0
    lineno = 0
    for lineno, line in enumerate(stream, 1):
        s = line.strip()
        if s.startswith(ISOLATED_TAG):
            for tok in s[len(ISOLATED_TAG):].split():
                if tok not in ids:
                    ids[tok] = len(ids)
            continue
        if not s or s[0] in "#%":
            continue
        parts = s.split()
        if len(parts) < 2:
            raise ParseError(f"expected 'u v', got {s!r}", lineno)
        if len(parts) > 2:
            weights += 1
        for tok, out in ((parts[0], src), (parts[1], dst)):
            i = ids.get(tok)
            if i is None:
                i = ids[tok] = len(ids)
                if i >= MAX_VERTICES:
                    raise ParseError("vertex count exceeds the 32-bit index range", lineno)
            out.append(i)
    if lineno == 0 or not ids:
        raise ParseError("empty input: no edges found")
    labels: list = list(ids)
    try:
        labels = [int(t) for t in labels]
    except ValueError:
        pass
    edges = np.column_stack([np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64)])
    return len(ids), edges, labels, lineno, weights


def _parse_int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected an integer, got {tok!r}", lineno) from None


def _read_mtx(stream):
    it = enumerate(stream, 1)
    header = next(it, None)
    if header is None:
        raise ParseError("empty input")
    lineno, line = header
    words = line.strip().lower().split()
    if len(words) < 4 or words[0] != "%%matrixmarket" or words[1] != "matrix":
        raise ParseError("missing %%MatrixMarket matrix header", lineno)
    if words[2] != "coordinate":
        raise ParseError(f"only coordinate matrices are supported, got {words[2]!r}", lineno)
    field = words[3]
    n = None
    nnz = 0
    src: list[int] = []
    dst: list[int] = []
    weights = 0
    for lineno, line in it:
        s = line.strip()
        if not s or s[0] == "%":
            continue
        parts = s.split()
        if n is None:
            if len(parts) != 3:
                raise ParseError("size line must be 'rows cols nnz'", lineno)
            rows, cols, nnz = (_parse_int(t, lineno) for t in parts)
            if rows != cols:
                raise ParseError(f"adjacency matrix must be square, got {rows}x{cols}", lineno)
            if rows > MAX_VERTICES:
                raise ParseError("vertex count exceeds the 32-bit index range", lineno)
            n = rows
            continue
        if len(parts) < 2:
            raise ParseError(f"expected 'i j', got {s!r}", lineno)
        i, j = _parse_int(parts[0], lineno), _parse_int(parts[1], lineno)
        if not (1 <= i <= n and 1 <= j <= n):
            raise ParseError(f"entry ({i}, {j}) outside 1..{n}", lineno)
        if len(parts) > 2 and field != "pattern":
            weights += 1
        src.append(i - 1)
        dst.append(j - 1)
    if n is None:
        raise ParseError("empty input: missing size line")
    if len(src) != nnz:
        log.warning("mtx header declares %d entries, found %d", nnz, len(src))
    edges = np.column_stack([np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64)])
    return n, edges, list(range(1, n + 1)), lineno, weights


def _read_dimacs(stream):
    n = None
    src: list[int] = []
    dst: list[int] = []
    weights = 0
    lineno = 0
    for lineno, line in enumerate(stream, 1):
        s = line.strip()
        if not s or s[0] == "c":
            continue
        parts = s.split()
        tag = parts[0]
        if tag == "p":
            if n is not None:
                raise ParseError("duplicate problem line", lineno)
            if len(parts) != 4 or parts[1] not in ("edge", "col"):
                raise ParseError("problem line must be 'p edge n m'", lineno)
            n = _parse_int(parts[2], lineno)
            _parse_int(parts[3], lineno)
            if n < 0 or n > MAX_VERTICES:
                raise ParseError(f"invalid vertex count {n}", lineno)
        elif tag == "e":
            if n is None:
                raise ParseError("edge line before problem line", lineno)
            if len(parts) < 3:
                raise ParseError(f"expected 'e u v', got {s!r}", lineno)
            u, v = _parse_int(parts[1], lineno), _parse_int(parts[2], lineno)
            if not (1 <= u <= n and 1 <= v <= n):
                raise ParseError(f"edge ({u}, {v}) outside 1..{n}", lineno)
            src.append(u - 1)
            dst.append(v - 1)
        elif tag == "n":
            weights += 1
        else:
            raise ParseError(f"unknown line type {tag!r}", lineno)
    if n is None:
        raise ParseError("empty input: missing 'p edge n m' line")
    edges = np.column_stack([np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64)])
    return n, edges, list(range(1, n + 1)), lineno, weights


def read_graph(path: str, format: str = "snap") -> Graph:
    """Read a graph file; ``.gz`` files are decompressed on the fly."""
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rt", encoding="utf-8") as fh:
        return parse_edge_list(fh, format)


def parse_text(text: str, format: str = "snap") -> Graph:
    return parse_edge_list(io.StringIO(text), format)


def write_edge_list(g: Graph, stream: IO[str]) -> None:
    """Write ``g`` as a SNAP-style edge list using its labels."""
    stream.write(f"# Nodes: {g.n} Edges: {g.m}\n")
    isolated = np.flatnonzero(g.degrees() == 0).tolist()
    if isolated:
        # plain SNAP cannot express isolated vertices; other readers see a comment
        stream.write(ISOLATED_TAG + " " + " ".join(str(g.label(v)) for v in isolated) + "\n")
    for u, v in g.edges().tolist():
        stream.write(f"{g.label(u)}\t{g.label(v)}\n")


# ---------------------------------------------------------------------------
# derived graphs


def as_vertex_set(g: Graph, vertices) -> np.ndarray:
    """Validate and return ``vertices`` as a strictly increasing index array."""
    u = np.asarray(vertices, dtype=np.int64).ravel()
    if len(u) == 0:
        return u.astype(INDEX_DTYPE)
    if u.min() < 0 or u.max() >= g.n:
        raise IndexError("vertex index out of range")
    if np.any(np.diff(u) <= 0):
        u = np.unique(u)
    return u.astype(INDEX_DTYPE)


def induced_subgraph(g: Graph, vertices) -> tuple[Graph, np.ndarray]:
    """Return ``G[U]`` and the array mapping new indices to old ones.

    Cost is proportional to the summed degree of ``U``, not to ``n``.
    """
    u = as_vertex_set(g, vertices)
    k = len(u)
    if k == 0:
        return Graph(np.zeros(1, dtype=np.int64), np.empty(0, dtype=INDEX_DTYPE)), u
    starts = g.indptr[u]
    counts = g.indptr[u + 1] - starts
    owner = np.repeat(np.arange(k, dtype=np.int64), counts)
    offs = np.arange(int(counts.sum()), dtype=np.int64) - np.repeat(np.cumsum(counts) - counts, counts)
    nbrs = g.indices[np.repeat(starts, counts) + offs]
    pos = np.searchsorted(u, nbrs)
    hit = (pos < k) & (u[np.minimum(pos, k - 1)] == nbrs)
    owner, pos = owner[hit], pos[hit]
    indptr = np.zeros(k + 1, dtype=np.int64)
    np.cumsum(np.bincount(owner, minlength=k), out=indptr[1:])
    labels = [g.label(int(v)) for v in u] if g.labels is not None else None
    return Graph(indptr, pos.astype(INDEX_DTYPE), labels), u


def complete_graph(n: int) -> Graph:
    iu = np.triu_indices(n, 1)
    return Graph.from_edges(n, np.column_stack(iu))


def generate_er(n: int, p: float, seed: int) -> Graph:
    """G(n, p) random graph.

    Pairs ``(i, j)``, ``j < i`` are indexed row by row; successive selected pair
    indices are found by geometric skips drawn from numpy's PCG64 generator
    seeded with ``seed``, so cost is O(n + m) and the result depends only on
    ``(n, p, seed)``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    total = n * (n - 1) // 2
    if p == 0.0 or total == 0:
        idx = np.empty(0, dtype=np.int64)
    elif p == 1.0:
        idx = np.arange(total, dtype=np.int64)
    else:
        rng = np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF)
        batch = int(p * total + 4 * math.sqrt(p * total) + 64)
        parts = []
        last = -1
        while True:
            steps = rng.geometric(p, size=batch)
            # huge skips for tiny p can wrap around int64; any skip past the end is equivalent
            steps[(steps <= 0) | (steps > total)] = total + 1
            pos = last + np.cumsum(steps)
            parts.append(pos[pos < total])
            if pos[-1] >= total:
                break
            last = int(pos[-1])
        idx = np.concatenate(parts)
    i = ((1 + np.sqrt(1 + 8 * idx.astype(np.float64))) / 2).astype(np.int64)
    # float rounding can be off by one near row boundaries
    i -= (i * (i - 1) // 2) > idx
    i += ((i + 1) * i // 2) <= idx
    j = idx - i * (i - 1) // 2
    return Graph.from_edges(n, np.column_stack([i, j]))


class DegreeStats(NamedTuple):
    max_degree: int
    min_degree: int
    density: float


def degree_stats(g: Graph) -> DegreeStats:
    if g.n == 0:
        return DegreeStats(0, 0, 0.0)
    d = g.degrees()
    density = 2.0 * g.m / (g.n * (g.n - 1)) if g.n >= 2 else 0.0
    return DegreeStats(int(d.max()), int(d.min()), density)


def density_of(g: Graph, vertices) -> float:
    """Edge density of ``G[vertices]``."""
    k = len(vertices)
    if k < 2:
        return 0.0
    sub, _ = induced_subgraph(g, vertices)
    return 2.0 * sub.m / (k * (k - 1))
