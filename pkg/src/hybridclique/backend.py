"""Device model: size-capped QUBO sampler, routing policy and the annealing reference backend."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Protocol

import numba as nb
import numpy as np

from .graph import Graph, density_of
from .kcore import Subproblem
from .qubo import Qubo, block_size

POLICY_MODES = ("always_device", "size_only", "density_threshold")


@dataclass(frozen=True)
class DeviceSpec:
    size: int  # max variables per call
    comm_cost: float = 0.0  # simulated seconds charged per call
    name: str = "simulated-annealer"

    def __post_init__(self):
        if self.size < 0:
            raise ValueError("device size must be nonnegative")
        if self.comm_cost < 0:
            raise ValueError("comm_cost must be nonnegative")


@dataclass(frozen=True)
class DecisionPolicy:
    mode: str = "size_only"
    density_min: float = 0.0

    def __post_init__(self):
        if self.mode not in POLICY_MODES:
            raise ValueError(f"unknown policy mode {self.mode!r}")
        if not 0.0 <= self.density_min <= 1.0:
            raise ValueError("density_min must lie in [0, 1]")


@dataclass(frozen=True)
class SaParams:
    sweeps: int = 2000
    restarts: int = 8
    beta_initial: float = 0.1
    beta_final: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.sweeps < 1 or self.restarts < 1:
            raise ValueError("sweeps and restarts must be at least 1")
        if not 0 < self.beta_initial <= self.beta_final:
            raise ValueError("need 0 < beta_initial <= beta_final")

    def betas(self) -> np.ndarray:
        if self.sweeps == 1:
            return np.array([self.beta_initial])
        return np.geomspace(self.beta_initial, self.beta_final, self.sweeps)


def accepts(sub: Subproblem, parent: Graph, policy: DecisionPolicy) -> bool:
    """Policy verdict ignoring the device size."""
    if policy.mode == "density_threshold":
        return density_of(parent, sub.candidates) >= policy.density_min
    return True


def is_well_suited(
    sub: Subproblem,
    parent: Graph,
    spec: DeviceSpec,
    policy: DecisionPolicy,
    include_root: bool = False,
) -> bool:
    """Whether the decision maker sends ``sub`` to the device.

    Every mode requires the encoded subproblem to fit; ``density_threshold``
    also requires ``density(G[candidates]) >= density_min``.
    """
    size = block_size(sub, include_root)
    if size == 0 or size > spec.size:
        return False
    return accepts(sub, parent, policy)


@nb.njit(cache=True)
def _anneal(linear, ptr, nbr, weight, betas, seed):
    np.random.seed(seed)
    n = len(linear)
    x = np.zeros(n, dtype=np.int8)
    for i in range(n):
        x[i] = 1 if np.random.random() < 0.5 else 0
    field = linear.copy()
    for i in range(n):
        if x[i]:
            for e in range(ptr[i], ptr[i + 1]):
                field[nbr[e]] += weight[e]
    energy = 0.0
    for i in range(n):
        if x[i]:
            energy += linear[i] + 0.5 * (field[i] - linear[i])
    best = x.copy()
    best_energy = energy
    for s in range(len(betas)):
        beta = betas[s]
        for i in range(n):
            delta = field[i] if x[i] == 0 else -field[i]
            if delta <= 0.0 or np.random.random() < math.exp(-beta * delta):
                sign = 1.0 if x[i] == 0 else -1.0
                x[i] = 1 - x[i]
                for e in range(ptr[i], ptr[i + 1]):
                    field[nbr[e]] += sign * weight[e]
                energy += delta
                if energy < best_energy - 1e-9:
                    best_energy = energy
                    best[:] = x
    return best


def _symmetric_csr(q: Qubo):
    i, j, c = q.coupling_arrays()
    src = np.concatenate([i, j])
    dst = np.concatenate([j, i])
    w = np.concatenate([c, c])
    order = np.argsort(src, kind="stable")
    ptr = np.zeros(q.dim + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=q.dim), out=ptr[1:])
    return ptr, dst[order].astype(np.int64), w[order]


def solve_qubo_sa(q: Qubo, params: SaParams | None = None) -> tuple[np.ndarray, float]:
    """Single-flip Metropolis annealing, best of ``params.restarts`` runs.

    Inverse temperature rises geometrically from ``beta_initial`` to
    ``beta_final`` over ``sweeps`` sweeps.  The returned energy is recomputed
    from scratch for the returned bits.
    """
    params = params or SaParams()
    if q.dim < 1:
        raise ValueError("QUBO must have at least one variable")
    ptr, nbr, w = _symmetric_csr(q)
    betas = params.betas()
    seeds = np.random.SeedSequence(params.seed & 0xFFFFFFFFFFFFFFFF).generate_state(params.restarts)
    best_bits = None
    best_energy = math.inf
    for s in seeds:
        bits = _anneal(q.linear, ptr, nbr, w, betas, int(s))
        e = q.energy(bits)
        if e < best_energy:
            best_bits, best_energy = bits, e
    return best_bits.astype(np.int8), best_energy


@dataclass(frozen=True)
class DeviceResult:
    bits: np.ndarray
    energy: float
    elapsed: float  # device compute seconds


class Device(Protocol):
    spec: DeviceSpec

    def submit(self, q: Qubo, call_index: int = 0) -> DeviceResult: ...


class SimulatedAnnealer:
    """Reference device: ``solve_qubo_sa`` behind a size check.

    Call ``k`` uses seed ``params.seed + k`` so a whole solve is reproducible.
    """

    def __init__(self, spec: DeviceSpec, params: SaParams | None = None):
        self.spec = spec
        self.params = params or SaParams()

    def submit(self, q: Qubo, call_index: int = 0) -> DeviceResult:
        if q.dim > self.spec.size:
            raise ValueError(f"QUBO with {q.dim} variables exceeds device size {self.spec.size}")
        p = self.params
        params = SaParams(p.sweeps, p.restarts, p.beta_initial, p.beta_final, p.seed + call_index)
        t0 = time.perf_counter()
        bits, energy = solve_qubo_sa(q, params)
        return DeviceResult(bits, energy, time.perf_counter() - t0)
