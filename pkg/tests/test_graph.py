import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_graph, vid
from hybridclique.graph import (
    Graph,
    ParseError,
    complete_graph,
    degree_stats,
    generate_er,
    induced_subgraph,
    parse_text,
    write_edge_list,
)
from oracles import adjacency_sets, pairs_within


def assert_simple_symmetric(g: Graph):
    adj = [set(g.neighbors(v).tolist()) for v in range(g.n)]
    for v in range(g.n):
        nb = g.neighbors(v)
        assert np.all(np.diff(nb) > 0)
        assert v not in adj[v]
        for u in adj[v]:
            assert v in adj[u]
    assert sum(len(a) for a in adj) == 2 * g.m


def test_fig3_parse(fig3):
    assert (fig3.n, fig3.m) == (6, 7)
    assert fig3.has_edge(vid(fig3, "a"), vid(fig3, "d"))
    assert_simple_symmetric(fig3)


def test_dimacs_edgeless():
    g = parse_text("c comment\np edge 3 0\n", "dimacs")
    assert (g.n, g.m) == (3, 0)
    assert g.degrees().tolist() == [0, 0, 0]


def test_dimacs_edges_one_based():
    g = parse_text("p edge 4 2\ne 1 2\ne 3 4\n", "dimacs")
    assert g.m == 2 and g.has_edge(0, 1) and g.has_edge(2, 3)


def test_mtx_symmetric_pattern():
    text = "%%MatrixMarket matrix coordinate pattern symmetric\n% c\n3 3 2\n2 1\n3 2\n"
    g = parse_text(text, "mtx")
    assert (g.n, g.m) == (3, 2)
    assert g.labels == (1, 2, 3)


def test_snap_normalizes_direction_loops_dups():
    g = parse_text("# x\n1 2\n2 1\n3 3\n1 2\n2 3\n")
    assert (g.n, g.m) == (3, 2)
    s = g.parse_summary
    assert s.self_loops == 1 and s.duplicates == 2
    assert_simple_symmetric(g)


def test_snap_string_labels():
    g = parse_text("alice bob\nbob carol\n")
    assert g.labels == ("alice", "bob", "carol")


@pytest.mark.parametrize(
    "text,fmt,line",
    [
        ("1 2\n3\n", "snap", 2),
        ("p edge 3 1\ne 1 x\n", "dimacs", 2),
        ("p edge 3 1\ne 1 9\n", "dimacs", 2),
        ("%%MatrixMarket matrix coordinate pattern symmetric\n3 3 1\n4 1\n", "mtx", 3),
    ],
)
def test_malformed_line_reports_number(text, fmt, line):
    with pytest.raises(ParseError) as exc:
        parse_text(text, fmt)
    assert exc.value.line == line


@pytest.mark.parametrize("fmt", ["snap", "mtx", "dimacs"])
def test_empty_input_is_error(fmt):
    with pytest.raises(ParseError):
        parse_text("", fmt)


def test_vertex_overflow_is_error():
    with pytest.raises(ParseError):
        parse_text(f"p edge {2**31} 0\n", "dimacs")


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.floats(0, 1), st.integers(0, 2**32))
def test_snap_round_trip(n, p, seed):
    g = generate_er(n, p, seed)
    buf = io.StringIO()
    write_edge_list(g, buf)
    h = parse_text(buf.getvalue())
    assert h.n == g.n
    assert h.m == g.m
    assert sorted(h.degrees().tolist()) == sorted(g.degrees().tolist())
    assert_simple_symmetric(h)


def test_induced_fig3_seed_block(fig3):
    h, mapping = induced_subgraph(fig3, [vid(fig3, "a"), vid(fig3, "d")])
    assert (h.n, h.m) == (2, 1)
    assert sorted(mapping.tolist()) == sorted([vid(fig3, "a"), vid(fig3, "d")])


def test_induced_empty(fig3):
    h, mapping = induced_subgraph(fig3, [])
    assert (h.n, h.m, len(mapping)) == (0, 0, 0)


def test_induced_out_of_range(fig3):
    with pytest.raises((IndexError, ValueError)):
        induced_subgraph(fig3, [0, 6])


def test_induced_matches_pair_enumeration():
    g = generate_er(20, 0.5, 1)
    rng = np.random.default_rng(0)
    u = rng.choice(20, 10, replace=False)
    h, mapping = induced_subgraph(g, u)
    assert h.m == pairs_within(adjacency_sets(g), u)
    assert sorted(mapping.tolist()) == sorted(u.tolist())
    for a, b in h.edges():
        assert g.has_edge(int(mapping[a]), int(mapping[b]))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 25), st.floats(0, 1), st.integers(0, 1000), st.data())
def test_induced_property(n, p, seed, data):
    g = random_graph(np.random.default_rng(seed), n, p)
    u = data.draw(st.sets(st.integers(0, n - 1)))
    h, mapping = induced_subgraph(g, sorted(u))
    assert h.n == len(u)
    assert h.m == pairs_within(adjacency_sets(g), u)
    assert_simple_symmetric(h)


def test_er_trivial():
    assert generate_er(5, 0.0, 3).m == 0
    k5 = generate_er(5, 1.0, 3)
    assert k5.m == 10


def test_er_binomial_band():
    total = 200 * 199 // 2
    mean, sd = 0.3 * total, math.sqrt(total * 0.3 * 0.7)
    for seed in range(5):
        assert abs(generate_er(200, 0.3, seed).m - mean) <= 4 * sd


def test_er_deterministic():
    a, b = generate_er(300, 0.1, 99), generate_er(300, 0.1, 99)
    assert a.indptr.tobytes() == b.indptr.tobytes()
    assert a.indices.tobytes() == b.indices.tobytes()
    assert generate_er(300, 0.1, 98).indices.tobytes() != a.indices.tobytes()


def test_er_pair_frequencies_uniform():
    # every pair should appear with probability p; check the two extremes of the index range
    hits = np.zeros((6, 6))
    for seed in range(2000):
        g = generate_er(6, 0.4, seed)
        for u, v in g.edges():
            hits[u, v] += 1
    freq = hits[np.triu_indices(6, 1)] / 2000
    assert np.all(np.abs(freq - 0.4) < 4 * math.sqrt(0.24 / 2000))


def test_degree_stats(fig3):
    ds = degree_stats(fig3)
    assert (ds.max_degree, ds.min_degree) == (3, 2)
    high = {fig3.label(v) for v in range(6) if fig3.degree(v) == 3}
    assert high == {"a", "d"}
    k5 = degree_stats(complete_graph(5))
    assert (k5.max_degree, k5.min_degree, k5.density) == (4, 4, 1.0)
    e = degree_stats(parse_text("p edge 3 0\n", "dimacs"))
    assert (e.max_degree, e.min_degree, e.density) == (0, 0, 0.0)
