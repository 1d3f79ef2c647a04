"""Brute-force reference DFS, lowpoints and LCA used to check the encoded versions."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .graph import Graph, GraphError, VertexRangeError


class OracleError(GraphError):
    pass


@dataclass
class OraclePalm:
    root: int
    preorder: list[int]
    st: dict[int, int]
    parent: dict[int, int]  # root maps to 0
    depth: dict[int, int]
    size: dict[int, int]
    tree_edges: list[tuple[int, int]] = field(default_factory=list)
    back_edges: list[tuple[int, int]] = field(default_factory=list)  # (descendant, ancestor)

    def children(self, u: int) -> list[int]:
        return sorted((v for v, p in self.parent.items() if p == u), key=self.st.__getitem__)


def naive_dfs(
    g: Graph,
    start: int,
    order_source: str | Callable[[int], Iterable[int]] = "ascending",
) -> OraclePalm:
    """Textbook DFS with an explicit stack.

    ``order_source`` is ``"ascending"``, or a callable giving each vertex's
    neighbours in the order to consume them (for example an encoding's
    ``level_neighbors``).
    """
    if not 1 <= start <= g.n:
        raise VertexRangeError(f"start {start} not in 1..{g.n}")
    if order_source == "ascending":
        nbrs: Callable[[int], Iterable[int]] = g.neighbors
    elif callable(order_source):
        nbrs = order_source
    else:
        raise ValueError(f"unknown order source {order_source!r}")
    st = {start: 1}
    parent = {start: 0}
    depth = {start: 0}
    preorder = [start]
    tree: list[tuple[int, int]] = []
    back: list[tuple[int, int]] = []
    its = {start: iter(nbrs(start))}
    stack = [start]
    finish_order = []
    while stack:
        v = stack[-1]
        w = next(its[v], None)
        if w is None:
            stack.pop()
            finish_order.append(v)
            continue
        if w not in st:
            st[w] = len(st) + 1
            parent[w] = v
            depth[w] = depth[v] + 1
            preorder.append(w)
            tree.append((v, w))
            its[w] = iter(nbrs(w))
            stack.append(w)
        elif w != parent[v] and st[w] < st[v]:
            back.append((v, w))
    if len(st) != g.n:
        raise OracleError("graph is not connected")
    size = {v: 1 for v in st}
    for v in finish_order:
        if parent[v]:
            size[parent[v]] += size[v]
    return OraclePalm(start, preorder, st, parent, depth, size, tree, back)


def naive_lowpoints(p: OraclePalm) -> dict[int, int]:
    """lp(u) = min(st(u), st(v) for back edges (u, v), lp(c) for children c)."""
    lp = dict(p.st)
    for u, v in p.back_edges:
        lp[u] = min(lp[u], p.st[v])
    for u in reversed(p.preorder):
        par = p.parent[u]
        if par:
            lp[par] = min(lp[par], lp[u])
    return lp


def naive_lca(p: OraclePalm, u: int, v: int) -> int:
    while p.depth[u] > p.depth[v]:
        u = p.parent[u]
    while p.depth[v] > p.depth[u]:
        v = p.parent[v]
    while u != v:
        u, v = p.parent[u], p.parent[v]
    return u


def offline_lca(p: OraclePalm, pairs: Sequence[tuple[int, int]]) -> list[int]:
    """Tarjan's offline LCA: one tree walk with union-find answers all pairs."""
    queries: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for k, (u, v) in enumerate(pairs):
        queries[u].append((v, k))
        queries[v].append((u, k))
    children: dict[int, list[int]] = defaultdict(list)
    for v in p.preorder[1:]:
        children[p.parent[v]].append(v)
    link = {v: v for v in p.preorder}
    top = dict(link)

    def find(x: int) -> int:
        root = x
        while link[root] != root:
            root = link[root]
        while link[x] != root:
            link[x], x = root, link[x]
        return root

    done = set()
    out = [0] * len(pairs)
    stack = [(p.root, iter(children[p.root]))]
    while stack:
        u, it = stack[-1]
        c = next(it, None)
        if c is not None:
            stack.append((c, iter(children[c])))
            continue
        stack.pop()
        done.add(u)
        for v, k in queries[u]:
            if v in done:
                out[k] = top[find(v)]
        if stack:
            par = stack[-1][0]
            link[find(u)] = find(par)
            top[find(par)] = par
    return out
