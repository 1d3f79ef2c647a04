from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from palmdiv.division import (
    DisconnectedGraphError,
    DivisionError,
    classify_edge,
    default_params,
    divide_subgraph,
    dump_division,
    duplicate_stats,
    find_separator,
    nested_division,
    relaxed_division,
)
from palmdiv.graph import Graph, gen_complete, gen_cycle, gen_grid, gen_path, gen_random_planar, gen_star

PIECE_COUNT_CONSTANT = 6  # measured upper constant c in |pieces| <= c * n / r


def components_after(g: Graph, removed) -> list[int]:
    seen = set(removed)
    sizes = []
    for s in g.vertices():
        if s in seen:
            continue
        seen.add(s)
        stack, size = [s], 0
        while stack:
            u = stack.pop()
            size += 1
            for w in g.neighbors(u):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        sizes.append(size)
    return sizes


def assert_division_invariants(g: Graph, d, r: int) -> None:
    owned = Counter(e for p in d.pieces for e in p.edges)
    assert set(owned) == set(g.edges())
    assert all(c == 1 for c in owned.values())
    occ = Counter(v for p in d.pieces for v in p.vertices)
    if g.n > 1:
        assert set(occ) == set(g.vertices())
    for p in d.pieces:
        assert len(p.vertices) <= r
        assert list(p.vertices) == sorted(set(p.vertices))
        vs = set(p.vertices)
        assert all(a in vs and b in vs for a, b in p.edges)
        assert p.boundary == {v for v in p.vertices if occ[v] > 1}
        assert all(d.edge_owner[e] == p.id for e in p.edges)
    assert d.boundary == {v for v, c in occ.items() if c > 1}


@pytest.mark.parametrize(
    "g",
    [gen_grid(3, 3), gen_path(3), gen_path(2), gen_grid(16, 16), gen_random_planar(500, 2), gen_star(9), gen_complete(4)],
    ids=repr,
)
def test_separator_balances(g):
    sep = find_separator(g)
    sizes = components_after(g, sep.vertices)
    assert max(sizes, default=0) <= (2 * g.n) // 3
    assert sep.balance <= 2 / 3
    assert find_separator(g) == sep


def test_separator_small_cases():
    path_sep = find_separator(gen_path(3))
    assert len(path_sep.vertices) == 1
    assert max(components_after(gen_path(3), path_sep.vertices)) <= 2
    assert len(find_separator(gen_path(2)).vertices) == 1
    assert find_separator(Graph(1)).vertices == frozenset()
    grid_sep = find_separator(gen_grid(3, 3))
    assert max(components_after(gen_grid(3, 3), grid_sep.vertices)) <= 6


def test_separator_rejects_disconnected():
    with pytest.raises(DisconnectedGraphError):
        find_separator(Graph(4, [(1, 2), (3, 4)]))


def test_whole_graph_single_piece():
    g = gen_grid(5, 5)
    d = relaxed_division(g, g.n)
    assert len(d.pieces) == 1 and not d.boundary
    nd = nested_division(g, g.n, g.n)
    assert len(nd.micro) == 1 and len(nd.micro[0].pieces) == 1
    stats = duplicate_stats(nd)
    assert (stats["mini_duplicates"], stats["micro_duplicates"], stats["per_piece_boundary_max"]) == (0, 0, 0)


def test_grid16_r64():
    g = gen_grid(16, 16)
    d = relaxed_division(g, 64)
    assert_division_invariants(g, d, 64)
    assert sum(len(p.edges) for p in d.pieces) == 480


def test_grid16_nested():
    g = gen_grid(16, 16)
    nd = nested_division(g, 64, 16)
    assert_division_invariants(g, nd.mini, 64)
    for p, sub in zip(nd.mini.pieces, nd.micro):
        owned = Counter(e for q in sub.pieces for e in q.edges)
        assert set(owned) == set(p.edges) and set(owned.values()) == {1}
        assert all(len(q.vertices) <= 16 for q in sub.pieces)
    stats = duplicate_stats(nd)
    assert stats["micro_duplicates"] >= stats["mini_duplicates"]
    assert stats["micro_duplicates"] < g.n


def test_duplicates_scale_with_n():
    prev = None
    for w, h in [(16, 16), (16, 32), (32, 32), (32, 64)]:
        stats = duplicate_stats(nested_division(gen_grid(w, h), 64, 16))
        if prev:
            for key in ("mini_duplicates", "micro_duplicates"):
                assert stats[key] <= 2 * 1.5 * prev[key]
        prev = stats


@pytest.mark.parametrize(
    "g", [gen_grid(16, 16), gen_grid(40, 40), gen_random_planar(2000, 1), gen_path(500), gen_cycle(300)], ids=repr
)
@pytest.mark.parametrize("r", [4, 16, 64])
def test_piece_count_upper_bound(g, r):
    d = relaxed_division(g, r)
    assert_division_invariants(g, d, r)
    assert len(d.pieces) <= PIECE_COUNT_CONSTANT * g.n / r


def test_classify_edge():
    g = gen_grid(8, 8)
    nd = nested_division(g, 16, 4)
    seen = set()
    for e in g.edges():
        for level in ("mini", "micro"):
            tag = classify_edge(nd, e, level)
            div = nd.mini if level == "mini" else nd.micro[nd.mini.edge_owner[e]]
            bu, bv = div.is_boundary(e[0]), div.is_boundary(e[1])
            want = "boundary" if bu and bv else "non-boundary" if not (bu or bv) else "transitional"
            assert tag == want
            seen.add(tag)
    assert seen == {"boundary", "non-boundary", "transitional"}
    with pytest.raises(KeyError):
        classify_edge(nd, (1, 64))


def test_default_params():
    assert default_params(1) == (1, 1)
    r, rt = default_params(256)
    assert (r, rt) == (64, 9)
    for n in (2, 3, 10, 1000, 10**6):
        r, rt = default_params(n)
        assert 1 <= rt <= r <= n


def test_rejections():
    with pytest.raises(DisconnectedGraphError):
        relaxed_division(Graph(3, [(1, 2)]), 2)
    with pytest.raises(DivisionError):
        relaxed_division(gen_path(4), 5)
    with pytest.raises(DivisionError):
        nested_division(gen_path(4), 2, 3)


def test_dump_format():
    text = dump_division(relaxed_division(gen_path(3), 3))
    assert text == "piece 0: vertices=1,2,3 boundary= edges=1-2,2-3\n"


def test_isolated_copies_pruned():
    g = gen_star(20)
    d = relaxed_division(g, 4)
    for p in d.pieces:
        touched = {v for e in p.edges for v in e}
        assert set(p.vertices) == touched


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 120), st.integers(0, 10**6), st.integers(2, 40))
def test_random_planar_divisions(n, seed, r):
    g = gen_random_planar(n, seed)
    r = min(r, n)
    assert_division_invariants(g, relaxed_division(g, r), r)


def test_divide_subgraph_disconnected_ok():
    d = divide_subgraph([1, 2, 3, 4], [(1, 2), (3, 4)], 2)
    assert sorted(e for p in d.pieces for e in p.edges) == [(1, 2), (3, 4)]
