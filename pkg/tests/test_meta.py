import random

import pytest

from palmdiv import build_encoding, dfs, preprocess_meta
from palmdiv.checks import check_meta
from palmdiv.container import encode_value
from palmdiv.dfs import back_edges, parent, preorder, tree_edges
from palmdiv.graph import Graph, VertexRangeError, gen_grid, gen_path, gen_random_planar, gen_star
from palmdiv.meta import (
    EulerLca,
    MetaStateError,
    depth,
    lca,
    lowpoint,
    num_descendants,
    resolver,
    st_number,
)
from palmdiv.oracle import naive_dfs, naive_lca


def prepared(g, start=1, r=None, r_tilde=None):
    enc = build_encoding(g, r, r_tilde)
    dfs(enc, start)
    preprocess_meta(enc)
    return enc


def test_grid3_values(grid3_single):
    enc = grid3_single
    assert st_number(enc, 6) == 4
    assert st_number(enc, 1) == 1
    assert depth(enc, 1) == 0 and depth(enc, 9) == 8
    assert num_descendants(enc, 5) == 5
    assert num_descendants(enc, 1) == 9 and num_descendants(enc, 9) == 1
    assert lowpoint(enc, 4) == 1
    assert lowpoint(enc, 9) == 4


def test_star_tree_lca():
    enc = prepared(Graph(5, [(1, 2), (1, 3), (2, 4), (2, 5)]))
    assert lca(enc, 4, 5) == 2
    assert lca(enc, 4, 3) == 1
    for u in range(1, 6):
        assert lca(enc, u, u) == u
        assert lca(enc, 1, u) == 1


def test_tree_input_lowpoint_is_st():
    g = gen_random_planar(200, 3)
    tree = Graph(g.n, [(parent_v, v) for parent_v, v in naive_dfs(g, 1).tree_edges])
    enc = prepared(tree, start=1)
    for u in tree.vertices():
        assert lowpoint(enc, u) == st_number(enc, u)


def test_queries_need_preprocessing():
    enc = build_encoding(gen_grid(3, 3))
    with pytest.raises(MetaStateError):
        st_number(enc, 1)
    with pytest.raises(MetaStateError):
        preprocess_meta(enc)
    dfs(enc, 1)
    with pytest.raises(MetaStateError):
        lowpoint(enc, 1)


def test_vertex_range(grid3_single):
    with pytest.raises(VertexRangeError):
        st_number(grid3_single, 10)
    with pytest.raises(VertexRangeError):
        lca(grid3_single, 0, 1)


def test_rerun_dfs_invalidates_meta():
    g = gen_grid(6, 6)
    enc = prepared(g)
    dfs(enc, 20)
    with pytest.raises(MetaStateError):
        st_number(enc, 1)
    preprocess_meta(enc)
    assert st_number(enc, 20) == 1


GRAPHS = [
    (gen_grid(16, 16), 1, 64, 16),
    (gen_grid(16, 16), 137, None, None),
    (gen_random_planar(500, 1), 250, None, None),
    (gen_random_planar(1500, 2), 9, None, None),
    (gen_path(60), 30, 8, 3),
    (gen_star(40), 5, 8, 3),
]


@pytest.fixture(scope="module", params=range(len(GRAPHS)))
def sample(request):
    g, s, r, rt = GRAPHS[request.param]
    return prepared(g, s, r, rt)


def test_oracle_equivalence(sample):
    for res in check_meta(sample, lca_pairs=3000, seed=5):
        assert res.ok, res.line()


def test_st_is_preorder_bijection(sample):
    res = resolver(sample)
    order = preorder(sample)
    assert [res.st(v) for v in order] == list(range(1, sample.n + 1))


def test_preorder_consistency(sample):
    res = resolver(sample)
    for u, v in tree_edges(sample):
        assert res.st(u) < res.st(v)
        assert res.depth(v) == res.depth(u) + 1
    for u, v in back_edges(sample):
        assert res.st(v) < res.st(u)


def test_subtree_interval_law(sample):
    res = resolver(sample)
    rng = random.Random(2)
    n = sample.n
    for _ in range(500):
        u, v = rng.randint(1, n), rng.randint(1, n)
        inside = res.st(u) <= res.st(v) < res.st(u) + res.nd(u)
        assert inside == (res.lca(u, v) == u)


def test_lca_is_deepest_common_ancestor(sample):
    res = resolver(sample)

    def ancestors(v):
        out = [v]
        while (p := parent(sample, out[-1])) is not None:
            out.append(p)
        return out

    rng = random.Random(8)
    for _ in range(100):
        u, v = rng.randint(1, sample.n), rng.randint(1, sample.n)
        common = set(ancestors(u)) & set(ancestors(v))
        assert res.lca(u, v) == max(common, key=res.depth)


def test_field_widths(sample):
    meta = sample.meta
    r = sample.r
    for anchor in meta.y_st.values():
        assert abs(anchor[2]) <= r
    for d in meta.y_depth.values():
        assert 0 < d <= r
    for anchor in meta.block_first.values():
        assert abs(anchor[2]) <= r


def test_global_forest_size():
    enc = prepared(gen_grid(16, 16), 1, 64, 16)
    boundary = enc.boundary_fid.rank1(enc.n)
    assert len(enc.meta.shrunk) <= 2 * boundary + 1


def test_single_piece_forest_has_root_only(grid3_single):
    assert set(grid3_single.meta.shrunk.parent) == {1}


def test_preprocessing_deterministic():
    a = prepared(gen_random_planar(300, 6), 4)
    b = prepared(gen_random_planar(300, 6), 4)
    assert encode_value(a.meta) == encode_value(b.meta)


class TestEulerLca:
    def test_path(self):
        t = EulerLca({1: 0, 2: 1, 3: 2, 4: 3})
        assert t.lca(4, 2) == 2
        assert t.child_toward(1, 4) == 2

    def test_forest_roots_disjoint(self):
        t = EulerLca({1: 0, 2: 1, 3: 0, 4: 3})
        assert t.lca(2, 4) == 0
        assert len(t) == 4

    def test_random_trees_against_naive(self):
        rng = random.Random(11)
        for n in (1, 2, 5, 40, 300):
            par = {1: 0}
            par.update({v: rng.randint(1, v - 1) for v in range(2, n + 1)})
            t = EulerLca(par)

            def chain(v):
                out = []
                while v:
                    out.append(v)
                    v = par[v]
                return out

            for _ in range(200):
                a, c = rng.randint(1, n), rng.randint(1, n)
                ca = chain(a)
                want = next(x for x in chain(c) if x in ca)
                assert t.lca(a, c) == want
                if want == a and a != c:
                    step = t.child_toward(a, c)
                    assert par[step] == a and step in chain(c)


def test_naive_lca_matches_on_grid(grid3_single):
    p = naive_dfs(grid3_single.graph, 1)
    assert naive_lca(p, 9, 4) == 4
