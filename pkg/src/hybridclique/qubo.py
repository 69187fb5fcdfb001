"""QUBO encoding of clique subproblems, block packing and decoding.

A subgraph ``H`` is encoded as ``-A * sum(x_i) + B * sum_{ij not in E(H)} x_i x_j``
with ``A = 1, B = 2`` (maximum independent set on the complement of ``H``).
Any selection containing a non-edge can drop one endpoint and lower its
energy, so every minimiser is a maximum clique with energy ``-omega(H)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from .clique import Clique
from .graph import Graph, induced_subgraph
from .kcore import Subproblem

REWARD = 1.0
PENALTY = 2.0


@dataclass
class Qubo:
    """Minimise ``offset + sum linear[i] x_i + sum_{i<j} quadratic[i, j] x_i x_j``."""

    dim: int
    linear: np.ndarray
    quadratic: dict[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        self.linear = np.asarray(self.linear, dtype=np.float64)
        if self.linear.shape != (self.dim,):
            raise ValueError("linear must have one coefficient per variable")
        for (i, j), c in self.quadratic.items():
            if not 0 <= i < j < self.dim:
                raise ValueError(f"quadratic key {(i, j)} must satisfy i < j < dim")
            if c == 0:
                raise ValueError("zero quadratic coefficients must not be stored")

    def matrix(self) -> np.ndarray:
        """Upper-triangular matrix ``Q`` with ``E(x) = x^T Q x + offset``."""
        q = np.diag(self.linear)
        for (i, j), c in self.quadratic.items():
            q[i, j] = c
        return q

    def coupling_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self.quadratic:
            e = np.empty(0, dtype=np.int64)
            return e, e, np.empty(0)
        keys = np.array(list(self.quadratic), dtype=np.int64)
        vals = np.fromiter(self.quadratic.values(), dtype=np.float64, count=len(self.quadratic))
        return keys[:, 0], keys[:, 1], vals

    def energy(self, bits) -> float:
        x = np.asarray(bits, dtype=np.float64)
        if x.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} bits, got shape {x.shape}")
        i, j, c = self.coupling_arrays()
        return float(self.offset + self.linear @ x + np.sum(c * x[i] * x[j]))

    def write(self, stream: IO[str]) -> None:
        """Coordinate text: ``dim`` line, then ``i j coeff`` with ``i == j`` for linear terms."""
        stream.write(f"{self.dim}\n")
        if self.offset:
            stream.write(f"# offset {self.offset!r}\n")
        for i, c in enumerate(self.linear.tolist()):
            if c:
                stream.write(f"{i} {i} {c!r}\n")
        for (i, j), c in sorted(self.quadratic.items()):
            stream.write(f"{i} {j} {c!r}\n")

    @classmethod
    def read(cls, stream: IO[str]) -> "Qubo":
        dim = None
        offset = 0.0
        linear = None
        quad: dict[tuple[int, int], float] = {}
        for line in stream:
            s = line.strip()
            if not s:
                continue
            if s.startswith("#"):
                parts = s[1:].split()
                if parts and parts[0] == "offset":
                    offset = float(parts[1])
                continue
            if dim is None:
                dim = int(s)
                linear = np.zeros(dim)
                continue
            a, b, c = s.split()
            i, j, v = int(a), int(b), float(c)
            if i == j:
                linear[i] += v
            else:
                key = (min(i, j), max(i, j))
                quad[key] = quad.get(key, 0.0) + v
        if dim is None:
            raise ValueError("empty QUBO file")
        return cls(dim, linear, {k: v for k, v in quad.items() if v}, offset)


def encode_graph(h: Graph) -> Qubo:
    """Clique QUBO over all vertices of ``h``."""
    k = h.n
    adj = h.bitsets()
    quad = {}
    for i in range(k):
        missing = ~adj[i] & ~((1 << (i + 1)) - 1) & ((1 << k) - 1)
        while missing:
            low = missing & -missing
            quad[(i, low.bit_length() - 1)] = PENALTY
            missing ^= low
    return Qubo(k, np.full(k, -REWARD), quad)


def subproblem_variables(sub: Subproblem, include_root: bool = False) -> np.ndarray:
    """Parent-graph vertices encoded for ``sub``, in variable order."""
    if include_root and sub.root is not None:
        return np.concatenate([[sub.root], sub.candidates]).astype(np.int64)
    return np.asarray(sub.candidates, dtype=np.int64)


def clique_to_qubo(
    sub: Subproblem, parent: Graph, include_root: bool = False
) -> tuple[Qubo, np.ndarray]:
    """Encode the candidates of ``sub`` (optionally with its root).

    Returns the QUBO and the variable -> parent vertex mapping.  The root is
    adjacent to every candidate, so leaving it out loses nothing.
    """
    variables = subproblem_variables(sub, include_root)
    if len(variables) == 0:
        raise ValueError("subproblem has no candidates to encode")
    order = np.argsort(variables, kind="stable")
    h, _ = induced_subgraph(parent, variables[order])
    q = encode_graph(h)
    if np.all(order == np.arange(len(order))):
        return q, variables
    # induced_subgraph sorts vertices; map its variables back to our order
    inv = np.empty_like(order)
    inv[order] = np.arange(len(order))
    quad = {}
    for (i, j), c in q.quadratic.items():
        a, b = int(inv[i]), int(inv[j])
        quad[(min(a, b), max(a, b))] = c
    return Qubo(q.dim, q.linear[order], quad, q.offset), variables


@dataclass(frozen=True)
class Block:
    sub_id: int
    start: int
    stop: int
    variables: np.ndarray  # variable (start + i) -> parent vertex


@dataclass
class PackedQubo:
    qubo: Qubo
    blocks: list[Block]
    subproblems: list[Subproblem]
    parent: Graph
    include_root: bool = False

    @property
    def dim(self) -> int:
        return self.qubo.dim


def block_size(sub: Subproblem, include_root: bool = False) -> int:
    return sub.size + (1 if include_root and sub.root is not None else 0)


def pack(
    subs: Sequence[Subproblem],
    parent: Graph,
    device_size: int,
    include_root: bool = False,
) -> tuple[PackedQubo, list[Subproblem]]:
    """Pack subproblems block-diagonally into one QUBO of at most ``device_size`` variables.

    First-fit decreasing on the upper bound: subproblems are visited by
    descending ``upper_bound`` (stable) and each one that still fits is
    admitted.  Returns the packed QUBO and the subproblems left over, in their
    original order.
    """
    for s in subs:
        if block_size(s, include_root) == 0:
            raise ValueError("empty subproblems cannot be packed")
        if block_size(s, include_root) > device_size:
            raise ValueError(
                f"subproblem with {block_size(s, include_root)} variables exceeds device size {device_size}"
            )
    order = sorted(range(len(subs)), key=lambda i: -subs[i].upper_bound)
    chosen: list[int] = []
    used = 0
    for i in order:
        size = block_size(subs[i], include_root)
        if used + size <= device_size:
            chosen.append(i)
            used += size
    taken = set(chosen)
    linear = []
    quad: dict[tuple[int, int], float] = {}
    blocks = []
    start = 0
    for bid, i in enumerate(chosen):
        q, variables = clique_to_qubo(subs[i], parent, include_root)
        linear.append(q.linear)
        for (a, b), c in q.quadratic.items():
            quad[(a + start, b + start)] = c
        blocks.append(Block(bid, start, start + q.dim, variables))
        start += q.dim
    lin = np.concatenate(linear) if linear else np.empty(0)
    packed = PackedQubo(Qubo(start, lin, quad), blocks, [subs[i] for i in chosen], parent, include_root)
    leftovers = [s for i, s in enumerate(subs) if i not in taken]
    return packed, leftovers


def repair(parent: Graph, selected: list[int]) -> list[int]:
    """Drop vertices until ``selected`` is a clique.

    Repeatedly removes the vertex with the most non-neighbours in the set
    (ties: the later one in the list).
    """
    sel = list(selected)
    while True:
        counts = [sum(1 for u in sel if u != v and not parent.has_edge(u, v)) for v in sel]
        worst = max(counts, default=0)
        if worst == 0:
            return sel
        drop = len(counts) - 1 - counts[::-1].index(worst)
        sel.pop(drop)


def decode(packed: PackedQubo, bits) -> list[Clique]:
    """Turn device output into one clique per packed subproblem.

    Each block's selected vertices are repaired into a clique and extended by
    the subproblem's fixed vertices (root and enclosing roots).
    """
    x = np.asarray(bits).astype(np.int64).ravel()
    if len(x) != packed.dim:
        raise ValueError(f"expected {packed.dim} bits, got {len(x)}")
    out = []
    for block, sub in zip(packed.blocks, packed.subproblems):
        picked = block.variables[x[block.start : block.stop] != 0].tolist()
        picked = repair(packed.parent, picked)
        out.append(Clique.of(set(sub.fixed) | set(picked)))
    return out
