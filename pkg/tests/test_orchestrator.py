import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_graph, vid
from hybridclique.backend import DecisionPolicy, DeviceSpec, SaParams
from hybridclique.clique import is_clique
from hybridclique.graph import complete_graph, generate_er
from hybridclique.kcore import Subproblem, core_decompose
from hybridclique.orchestrator import (
    HybridConfig,
    HybridSolveError,
    children,
    decomposition_stats,
    prune_subproblem,
    solve_hybrid,
)
from oracles import adjacency_sets, clique_number


def cfg(size=0, **kw):
    return HybridConfig(device=DeviceSpec(size, kw.pop("comm_cost", 0.0)), **kw)


def check_report(r, g):
    assert r.omega == len(r.best_clique.vertices)
    assert is_clique(g, r.best_clique.vertices)
    assert r.t_total == r.t_cpu + r.t_comm + r.t_noncpu
    assert r.t_comm == r.device_calls * r.comm_cost
    assert r.best_trace == sorted(r.best_trace)
    assert len(set(r.best_trace)) == len(r.best_trace)
    for lv in r.levels:
        if lv.num_subproblems:
            assert lv.min <= lv.avg <= lv.max


@pytest.mark.parametrize("size", [0, 2, 4])
def test_fig3_three_solved(fig3, size):
    r = solve_hybrid(fig3, cfg(size))
    assert r.omega == 2 and r.k_graph == 2
    assert r.subproblems_solved == 3
    assert r.levels[0].generated == 5 and r.levels[0].num_subproblems == 3
    check_report(r, fig3)


def test_fig3_pruned_roots_are_f_and_b(fig3):
    best = 2
    cd = core_decompose(fig3)
    for name, keep in (("f", False), ("b", False), ("e", True), ("c", True)):
        w = vid(fig3, name)
        s = Subproblem(w, cd.later_neighbors(fig3, w), int(cd.core[w]))
        assert prune_subproblem(s, best, False, fig3) is keep, name
    # ungated colouring also drops e: {f, d} is edgeless, so 1 + 1 <= 2.
    # The solver only colours level-1 blocks of density >= 0.5, which keeps e.
    w = vid(fig3, "e")
    s = Subproblem(w, cd.later_neighbors(fig3, w), 2)
    assert not prune_subproblem(s, best, True, fig3)


def test_fig3_whole_graph_fits(fig3):
    r = solve_hybrid(fig3, cfg(6))
    assert r.omega == 2 and r.device_calls == 1


def test_prune_rule_arithmetic():
    g = complete_graph(6)
    s = Subproblem(0, np.array([1, 2, 3, 4], dtype=np.int32), 5)
    assert prune_subproblem(s, 4, False, g)
    assert not prune_subproblem(s, 5, False, g)
    empty = Subproblem(0, np.empty(0, dtype=np.int32), 2)
    assert not prune_subproblem(empty, 2, False, g)
    seed = Subproblem(None, np.array([1, 2, 3], dtype=np.int32), 3)
    assert prune_subproblem(seed, 2, False, g) and not prune_subproblem(seed, 3, False, g)


def test_kcore_rule_is_safe_form():
    # a (K+1)-clique through the root must survive best == K
    g = complete_graph(4)
    s = Subproblem(0, np.array([1, 2, 3], dtype=np.int32), 3)
    assert prune_subproblem(s, 3, False, g)
    assert not prune_subproblem(s, 3, False, g, literal=True)


def test_coloring_rule_on_dense_level2():
    g = generate_er(500, 0.4, 1)
    cd = core_decompose(g)
    w = int(cd.order[len(cd.order) // 2])
    s = Subproblem(w, cd.later_neighbors(g, w), int(cd.core[w]))
    kid = max(children(s, g), key=lambda c: c.size)
    from hybridclique.coloring import dsatur_color_count

    colors = dsatur_color_count(g, kid.candidates)
    best = kid.offset + colors
    assert not prune_subproblem(kid, best, False, g)  # size and k-core bounds alone keep it
    assert not prune_subproblem(kid, best, True, g)
    assert not prune_subproblem(kid, best - 1, True, g)
    assert prune_subproblem(kid, best + 1, True, g) is False or kid.offset + colors > best + 1


def test_coloring_drop_example():
    # a subproblem whose candidates need 9 colours drops at best 10 only through rule (c)
    g = generate_er(400, 0.45, 3)
    cd = core_decompose(g)
    from hybridclique.coloring import dsatur_color_count

    for w in cd.order[::-1].tolist():
        s = Subproblem(w, cd.later_neighbors(g, w), int(cd.core[w]), level=2)
        if s.size >= 10 and dsatur_color_count(g, s.candidates) == 9:
            break
    else:
        pytest.skip("no subproblem with exactly 9 colours")
    assert prune_subproblem(s, 10, False, g)
    assert not prune_subproblem(s, 10, True, g)


@pytest.mark.parametrize("level", [1, 2, 3])
def test_oracle_small_graphs(level):
    rng = np.random.default_rng(level)
    for _ in range(25):
        n = int(rng.integers(2, 26))
        g = random_graph(rng, n, float(rng.uniform(0.1, 0.9)))
        r = solve_hybrid(g, cfg(16, decomposition_level=level))
        assert r.omega == clique_number(adjacency_sets(g))
        check_report(r, g)


def test_pruning_is_safe():
    rng = np.random.default_rng(77)
    for i in range(40):
        g = random_graph(rng, int(rng.integers(2, 31)), float(rng.uniform(0.1, 0.9)))
        a = solve_hybrid(g, cfg(8, decomposition_level=2))
        b = solve_hybrid(g, cfg(8, decomposition_level=2, prune=False, use_heuristic=False))
        assert a.omega == b.omega
        assert a.subproblems_solved <= b.subproblems_solved


def test_cpu_only_exact():
    g = generate_er(150, 0.4, 5)
    from hybridclique.clique import max_clique_exact

    r = solve_hybrid(g, cfg(0))
    assert r.device_calls == 0 and r.omega == max_clique_exact(g)[0].size
    assert r.levels[0].generated == g.n - r.k_graph + 1


def test_policy_rejecting_everything_still_exact():
    g = generate_er(60, 0.2, 1)
    r = solve_hybrid(g, cfg(20, policy=DecisionPolicy("density_threshold", 1.0)))
    assert r.device_calls == 0 and r.omega == clique_number(adjacency_sets(g))


def test_accounting_with_comm_cost():
    g = generate_er(60, 0.5, 2)
    r = solve_hybrid(g, cfg(12, comm_cost=0.25, decomposition_level=2))
    check_report(r, g)
    assert r.device_calls >= 1
    assert r.device_calls <= r.device_solved


def test_packing_reduces_calls():
    g = generate_er(80, 0.15, 4)
    r = solve_hybrid(g, cfg(40, use_heuristic=False))
    assert 1 <= r.device_calls < r.device_solved


def test_hard_error_without_fallback():
    g = generate_er(60, 0.6, 1)
    with pytest.raises(HybridSolveError):
        solve_hybrid(g, cfg(4, cpu_fallback=False, decomposition_level=1))


def test_deterministic_omega_and_counts():
    g = generate_er(70, 0.4, 9)
    a = solve_hybrid(g, cfg(16, decomposition_level=2))
    b = solve_hybrid(g, cfg(16, decomposition_level=2))
    assert a.to_dict(g, timing=False) == b.to_dict(g, timing=False)


def test_stats_fig3(fig3):
    lv = decomposition_stats(fig3, 1, 2)
    assert (lv[0].generated, lv[0].num_subproblems) == (5, 3)


def test_stats_complete():
    lv = decomposition_stats(complete_graph(5), 1, 5)
    assert lv[0].generated == 2 and (lv[0].max, lv[0].min) == (4, 4)


def test_sparse_graphs_mostly_pruned_by_round_two():
    empty = 0
    for seed in range(10):
        g = generate_er(500, 0.1, seed)
        from hybridclique.clique import greedy_clique_heuristic

        lv = decomposition_stats(g, 2, greedy_clique_heuristic(g, 0).size)
        empty += lv[1].num_subproblems == 0
    assert empty >= 6


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 20), st.floats(0.05, 0.95), st.integers(0, 10**6), st.integers(1, 3), st.integers(0, 20))
def test_hybrid_property(n, p, seed, level, size):
    g = random_graph(np.random.default_rng(seed), n, p)
    r = solve_hybrid(g, cfg(size, decomposition_level=level, sa=SaParams(seed=seed)))
    assert r.omega == clique_number(adjacency_sets(g))
    assert r.omega <= r.k_graph + 1
    check_report(r, g)
