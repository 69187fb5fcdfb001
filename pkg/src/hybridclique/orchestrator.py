"""Hybrid CPU/device maximum-clique driver.

Decompose by degeneracy order, discard subproblems whose bound cannot beat
the incumbent, send the ones the decision maker accepts to the device in
packed batches, solve the rest with branch and bound, and keep the best.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .backend import (
    DecisionPolicy,
    Device,
    DeviceSpec,
    SaParams,
    SimulatedAnnealer,
    accepts,
    is_well_suited,
)
from .clique import BnbConfig, Clique, greedy_clique_heuristic, max_clique_exact
from .coloring import dsatur_color
from .graph import Graph, induced_subgraph
from .kcore import Subproblem, core_decompose, enumerate_subproblems
from .qubo import block_size, decode, pack

DENSE_COLORING = 0.5


class HybridSolveError(RuntimeError):
    pass


@dataclass(frozen=True)
class HybridConfig:
    device: DeviceSpec = field(default_factory=lambda: DeviceSpec(0))
    policy: DecisionPolicy = field(default_factory=DecisionPolicy)
    decomposition_level: int = 1
    use_dsatur_prune: bool = True
    sa: SaParams = field(default_factory=SaParams)
    cpu_fallback: bool = True
    # drop a rooted subproblem once best >= K(root), as literally stated for
    # the early stop; can lose a (K(root) + 1)-clique, so off by default
    literal_kcore_stop: bool = False
    use_heuristic: bool = True
    heuristic_seed: int = 0
    encode_roots: bool = False
    prune: bool = True
    node_limit: int | None = None

    def __post_init__(self):
        if self.decomposition_level < 1:
            raise ValueError("decomposition_level must be at least 1")


@dataclass
class LevelStats:
    level: int
    generated: int
    num_subproblems: int  # survivors of pruning
    max: int = 0
    min: int = 0
    avg: float = 0.0
    pruned_size: int = 0
    pruned_kcore: int = 0
    pruned_color: int = 0

    @classmethod
    def of(cls, level: int, generated: int, survivors: list[Subproblem], reasons: dict) -> "LevelStats":
        sizes = [s.size for s in survivors]
        st = cls(level, generated, len(sizes))
        if sizes:
            st.max, st.min, st.avg = max(sizes), min(sizes), float(np.mean(sizes))
        st.pruned_size = reasons.get("size", 0)
        st.pruned_kcore = reasons.get("kcore", 0)
        st.pruned_color = reasons.get("color", 0)
        return st


@dataclass
class SolveReport:
    best_clique: Clique
    omega: int
    k_graph: int
    levels: list[LevelStats]
    device_calls: int
    cpu_solved: int
    device_solved: int
    device_variables: int  # variables actually submitted
    device_variables_with_roots: int  # same, counting one extra variable per rooted block
    comm_cost: float
    t_cpu: float
    t_comm: float
    t_noncpu: float
    t_total: float
    optimal: bool = True
    best_trace: list[int] = field(default_factory=list)

    @property
    def subproblems_solved(self) -> int:
        return self.cpu_solved + self.device_solved

    def to_dict(self, g: Graph | None = None, timing: bool = True) -> dict:
        clique = self.best_clique.labels(g) if g is not None else list(self.best_clique.vertices)
        out = {
            "omega": self.omega,
            "k_graph": self.k_graph,
            "clique": clique,
            "levels": [asdict(lv) for lv in self.levels],
            "device_calls": self.device_calls,
            "cpu_solved": self.cpu_solved,
            "device_solved": self.device_solved,
            "subproblems_solved": self.subproblems_solved,
            "device_variables": self.device_variables,
            "device_variables_with_roots": self.device_variables_with_roots,
            "optimal": self.optimal,
        }
        if timing:
            out.update(t_cpu=self.t_cpu, t_comm=self.t_comm, t_noncpu=self.t_noncpu, t_total=self.t_total)
        return out


def _prune(
    sub: Subproblem,
    best: int,
    parent: Graph,
    use_dsatur: bool,
    literal: bool = False,
    gated: bool = False,
) -> tuple[str | None, Subproblem]:
    """Return ``(reason, sub)``; ``reason`` is None when ``sub`` must be kept.

    Cheapest test first: size, core number, then DSATUR colours.  With
    ``gated`` colouring only runs for level >= 2 or dense candidate sets.
    """
    if sub.offset + sub.size <= best:
        return "size", sub
    kcore_offset = len(sub.prefix) if literal and sub.root is not None else sub.offset
    if kcore_offset + sub.kcore_bound <= best:
        return "kcore", sub
    if use_dsatur and sub.size:
        h, _ = induced_subgraph(parent, sub.candidates)
        k = h.n
        dense = k >= 2 and 2.0 * h.m / (k * (k - 1)) >= DENSE_COLORING
        if not gated or sub.level >= 2 or dense:
            colors = dsatur_color(h).colors_used
            sub = Subproblem(sub.root, sub.candidates, sub.kcore_bound, sub.level, sub.prefix, colors)
            if sub.offset + colors <= best:
                return "color", sub
    return None, sub


def prune_subproblem(
    sub: Subproblem, best: int, use_dsatur: bool, parent: Graph, literal: bool = False
) -> bool:
    """True to keep ``sub``, False to drop it.

    Drops when the root, enclosing roots and all candidates together cannot
    exceed ``best``, when the root's core number cannot, or (with
    ``use_dsatur``) when the DSATUR colour count of ``G[candidates]`` cannot.
    """
    reason, _ = _prune(sub, best, parent, use_dsatur, literal)
    return reason is None


def children(sub: Subproblem, parent: Graph) -> list[Subproblem]:
    """Decompose ``G[sub.candidates]`` again, keeping ids in ``parent``."""
    h, mapping = induced_subgraph(parent, sub.candidates)
    out = []
    for s in enumerate_subproblems(h, core_decompose(h), sub.level + 1):
        root = int(mapping[s.root]) if s.root is not None else None
        out.append(Subproblem(root, mapping[s.candidates], s.kcore_bound, sub.level + 1, sub.fixed))
    return out


class _Run:
    def __init__(self, g: Graph, cfg: HybridConfig, device: Device):
        self.g = g
        self.cfg = cfg
        self.device = device
        self.best: tuple[int, ...] = ()
        self.trace: list[int] = []
        self.calls = 0
        self.noncpu = 0.0
        self.cpu_solved = 0
        self.device_solved = 0
        self.device_vars = 0
        self.device_vars_roots = 0
        self.optimal = True
        self.top_seed: Subproblem | None = None

    def offer(self, vertices) -> None:
        vs = tuple(sorted(int(v) for v in vertices))
        if len(vs) > len(self.best):
            self.best = vs
            self.trace.append(len(vs))

    def prune(self, sub: Subproblem) -> tuple[str | None, Subproblem]:
        if not self.cfg.prune:
            return None, sub
        return _prune(
            sub, len(self.best), self.g, self.cfg.use_dsatur_prune, self.cfg.literal_kcore_stop, gated=True
        )

    def solve_cpu(self, sub: Subproblem) -> None:
        self.cpu_solved += 1
        if sub.size == 0:
            self.offer(sub.fixed)
            return
        h, mapping = induced_subgraph(self.g, sub.candidates)
        lower = max(0, len(self.best) - sub.offset)
        found, stats = max_clique_exact(h, BnbConfig(lower, self.cfg.node_limit))
        self.optimal &= stats.optimal
        if found is not None:
            self.offer(sub.fixed + tuple(int(mapping[v]) for v in found.vertices))

    def flush(self, queue: list[Subproblem]) -> None:
        include_root = self.cfg.encode_roots
        while queue:
            if self.cfg.prune:
                queue = [s for s in queue if s is self.top_seed or self.prune(s)[0] is None]
                if not queue:
                    return
            packed, queue = pack(queue, self.g, self.device.spec.size, include_root)
            result = self.device.submit(packed.qubo, self.calls)
            self.calls += 1
            self.noncpu += result.elapsed
            self.device_vars += packed.dim
            self.device_vars_roots += sum(block_size(s, True) for s in packed.subproblems)
            for clique in decode(packed, result.bits):
                self.device_solved += 1
                self.offer(clique.vertices)


def solve_hybrid(g: Graph, cfg: HybridConfig | None = None, device: Device | None = None) -> SolveReport:
    """Maximum clique of ``g`` on a CPU plus a size-limited QUBO device.

    Exact whenever the device returns optimal samples for its packed blocks
    and ``cfg.cpu_fallback`` is on.  Raises :class:`HybridSolveError` when a
    subproblem can be neither sent to the device, decomposed further nor
    solved on the CPU.
    """
    cfg = cfg or HybridConfig()
    device = device or SimulatedAnnealer(cfg.device, cfg.sa)
    t_start = time.perf_counter()
    run = _Run(g, cfg, device)
    if cfg.use_heuristic:
        run.offer(greedy_clique_heuristic(g, cfg.heuristic_seed).vertices)

    cd = core_decompose(g)
    levels: list[LevelStats] = []
    whole = Subproblem(None, np.arange(g.n, dtype=np.int32), cd.k_graph + 1, 0)
    if g.n and is_well_suited(whole, g, device.spec, cfg.policy, cfg.encode_roots):
        run.flush([whole])
    else:
        frontier = list(enumerate_subproblems(g, cd))
        top = cfg.decomposition_level
        for level in range(1, top + 1):
            if not frontier:
                break
            generated = len(frontier)
            frontier.sort(key=lambda s: -s.kcore_bound)
            survivors: list[Subproblem] = []
            reasons: dict[str, int] = {}
            queue: list[Subproblem] = []
            deeper: list[Subproblem] = []
            for sub in frontier:
                if level == 1 and sub.root is None:
                    run.top_seed = sub
                else:
                    reason, sub = run.prune(sub)
                    if reason:
                        reasons[reason] = reasons.get(reason, 0) + 1
                        continue
                survivors.append(sub)
                if sub.size == 0:
                    run.solve_cpu(sub)
                elif is_well_suited(sub, g, device.spec, cfg.policy, cfg.encode_roots):
                    queue.append(sub)
                elif level < top and device.spec.size > 0 and accepts(sub, g, cfg.policy):
                    deeper.append(sub)
                elif cfg.cpu_fallback:
                    run.solve_cpu(sub)
                else:
                    raise HybridSolveError(
                        f"level-{level} subproblem (root={sub.root}, {sub.size} candidates) "
                        "cannot be sent to the device, decomposed or solved on the CPU"
                    )
            run.flush(queue)
            levels.append(LevelStats.of(level, generated, survivors, reasons))
            frontier = []
            for sub in deeper:
                if cfg.prune and run.prune(sub)[0] is not None:
                    continue
                frontier.extend(children(sub, g))

    t_noncpu = run.noncpu
    t_cpu = (time.perf_counter() - t_start) - t_noncpu
    t_comm = run.calls * device.spec.comm_cost
    return SolveReport(
        best_clique=Clique(run.best),
        omega=len(run.best),
        k_graph=cd.k_graph,
        levels=levels,
        device_calls=run.calls,
        cpu_solved=run.cpu_solved,
        device_solved=run.device_solved,
        device_variables=run.device_vars,
        device_variables_with_roots=run.device_vars_roots,
        comm_cost=device.spec.comm_cost,
        t_cpu=t_cpu,
        t_comm=t_comm,
        t_noncpu=t_noncpu,
        t_total=t_cpu + t_comm + t_noncpu,
        optimal=run.optimal,
        best_trace=run.trace,
    )


def decomposition_stats(
    g: Graph,
    levels: int,
    incumbent: int,
    use_dsatur: bool = True,
    device_size: int | None = None,
    literal: bool = False,
) -> list[LevelStats]:
    """Per-level subproblem counts without solving anything.

    Pruning is against the fixed ``incumbent`` with the same rules and
    colouring gate as :func:`solve_hybrid`; the top-level seed block is always
    kept.  Survivors are split again up to ``levels`` levels, except
    those already fitting ``device_size`` when it is given.
    """
    frontier = list(enumerate_subproblems(g, core_decompose(g)))
    out = []
    for level in range(1, levels + 1):
        if not frontier:
            out.append(LevelStats(level, 0, 0))
            continue
        survivors = []
        reasons: dict[str, int] = {}
        for sub in frontier:
            if not (level == 1 and sub.root is None):
                reason, sub = _prune(sub, incumbent, g, use_dsatur, literal, gated=True)
                if reason:
                    reasons[reason] = reasons.get(reason, 0) + 1
                    continue
            survivors.append(sub)
        out.append(LevelStats.of(level, len(frontier), survivors, reasons))
        frontier = []
        if level < levels:
            for sub in survivors:
                if device_size is not None and sub.size <= device_size:
                    continue
                frontier.extend(children(sub, g))
    return out
