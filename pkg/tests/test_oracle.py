import random

import networkx as nx
import pytest

from palmdiv import build_encoding
from palmdiv.graph import Graph, gen_complete, gen_cycle, gen_grid, gen_path, gen_random_planar
from palmdiv.oracle import OracleError, naive_dfs, naive_lca, naive_lowpoints, offline_lca


def ascending_digraph(g):
    # symmetric digraph whose successor lists are in ascending order
    d = nx.DiGraph()
    d.add_nodes_from(g.vertices())
    arcs = sorted([(u, v) for u, v in g.edges()] + [(v, u) for u, v in g.edges()])
    d.add_edges_from(arcs)
    return d


def test_grid3_preorder_and_lowpoints():
    p = naive_dfs(gen_grid(3, 3), 1)
    assert p.preorder == [1, 2, 3, 6, 5, 4, 7, 8, 9]
    lp = naive_lowpoints(p)
    assert [lp[v] for v in range(1, 10)] == [1, 1, 1, 1, 1, 1, 4, 4, 4]


def test_k2():
    p = naive_dfs(Graph(2, [(1, 2)]), 1)
    assert p.preorder == [1, 2]
    assert p.tree_edges == [(1, 2)] and p.back_edges == []


def test_cycle_lowpoints_reach_root():
    p = naive_dfs(gen_cycle(4), 1)
    assert set(naive_lowpoints(p).values()) == {1}


def test_tree_lowpoint_equals_st():
    p = naive_dfs(gen_path(30), 12)
    assert naive_lowpoints(p) == p.st


def test_star_tree_lca():
    p = naive_dfs(Graph(5, [(1, 2), (1, 3), (2, 4), (2, 5)]), 1)
    assert naive_lca(p, 4, 5) == 2
    assert naive_lca(p, 4, 3) == 1
    assert naive_lca(p, 3, 3) == 3
    assert naive_lca(p, 1, 5) == 1


def test_replay_on_single_piece_matches_ascending():
    g = gen_grid(3, 3)
    enc = build_encoding(g, 9, 9)
    a = naive_dfs(g, 1)
    b = naive_dfs(g, 1, lambda u: list(enc.level_neighbors(u)))
    assert a.preorder == b.preorder and a.back_edges == b.back_edges


def test_errors():
    with pytest.raises(OracleError):
        naive_dfs(Graph(3, [(1, 2)]), 1)
    with pytest.raises(IndexError):
        naive_dfs(gen_path(3), 4)
    with pytest.raises(ValueError):
        naive_dfs(gen_path(3), 1, "descending")


def test_deep_path_needs_no_recursion():
    p = naive_dfs(gen_path(5000), 1)
    assert p.depth[5000] == 4999


@pytest.mark.parametrize(
    "g,start",
    [(gen_grid(7, 9), 30), (gen_random_planar(300, 4), 17), (gen_complete(4), 2), (gen_cycle(15), 8)],
    ids=repr,
)
def test_agrees_with_networkx(g, start):
    d = ascending_digraph(g)
    p = naive_dfs(g, start)
    assert p.preorder == list(nx.dfs_preorder_nodes(d, start))
    assert sorted(p.tree_edges) == sorted(nx.dfs_edges(d, start))
    tree = nx.DiGraph(p.tree_edges)
    tree.add_node(start)
    for u, v in [(3, g.n), (start, g.n - 1), (g.n, 1), (2, 2)]:
        assert naive_lca(p, u, v) == nx.lowest_common_ancestor(tree, u, v)


def test_self_consistency():
    p = naive_dfs(gen_random_planar(400, 8), 33)
    lp = naive_lowpoints(p)
    for u in p.preorder:
        assert lp[u] <= p.st[u]
        par = p.parent[u]
        if par:
            assert p.st[par] <= p.st[u] < p.st[par] + p.size[par]
            assert lp[par] <= lp[u]


@pytest.mark.parametrize("g,start", [(gen_grid(9, 9), 41), (gen_random_planar(500, 2), 3), (Graph(1), 1)], ids=repr)
def test_offline_lca_matches_naive(g, start):
    p = naive_dfs(g, start)
    rng = random.Random(4)
    pairs = [(rng.randint(1, g.n), rng.randint(1, g.n)) for _ in range(2000)] + [(start, start)]
    assert offline_lca(p, pairs) == [naive_lca(p, u, v) for u, v in pairs]
