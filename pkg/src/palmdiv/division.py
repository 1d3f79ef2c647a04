"""Balanced separators, relaxed divisions and nested divisions.

Pieces are produced by recursive separation: a region larger than ``r`` is cut
by a BFS-level separator, every component of the remainder becomes a region
together with its adjacent separator vertices (copies of which become boundary
vertices), and regions are split again until they fit.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from .graph import Graph, GraphError, VertexRangeError

Edge = tuple[int, int]
Adjacency = Mapping[int, list[int]]


class DivisionError(GraphError):
    pass


class DisconnectedGraphError(DivisionError):
    pass


@dataclass(frozen=True)
class Separator:
    vertices: frozenset[int]
    balance: float  # largest remaining component / n


@dataclass(frozen=True)
class Piece:
    id: int
    vertices: tuple[int, ...]
    edges: tuple[Edge, ...]
    boundary: frozenset[int]

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass
class RelaxedDivision:
    pieces: list[Piece]
    r: int
    alpha: float | None = None
    edge_owner: dict[Edge, int] = field(default_factory=dict)
    occurrences: dict[int, list[int]] = field(default_factory=dict)

    @cached_property
    def boundary(self) -> frozenset[int]:
        return frozenset(v for v, occ in self.occurrences.items() if len(occ) > 1)

    def is_boundary(self, v: int) -> bool:
        return len(self.occurrences.get(v, ())) > 1

    def duplicates(self) -> int:
        return sum(len(p.boundary) for p in self.pieces)


@dataclass
class NestedDivision:
    mini: RelaxedDivision
    micro: list[RelaxedDivision]
    r: int
    r_tilde: int

    def micro_boundary_count(self) -> int:
        return sum(len(d.boundary) for d in self.micro)


def norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def default_params(n: int) -> tuple[int, int]:
    """r = ceil(log^2 n), r_tilde = ceil((log log n)^2), clamped to [2, n] with r_tilde <= r."""
    if n <= 1:
        return 1, 1
    lg = math.log2(n)
    r = math.ceil(lg * lg)
    llg = math.log2(lg) if lg > 1 else 0.0
    rt = math.ceil(llg * llg)
    r = min(max(r, 2), n)
    rt = min(max(rt, 2), r)
    return r, rt


# -- separators -------------------------------------------------------------


def _adjacency_of(g: Graph | Adjacency) -> dict[int, list[int]]:
    if isinstance(g, Graph):
        return {u: list(g.adj[u]) for u in range(1, g.n + 1)}
    return {u: list(vs) for u, vs in g.items()}


def _bfs_levels(adj: Adjacency, root: int, allowed: set[int] | None = None) -> list[list[int]]:
    levels = [[root]]
    seen = {root}
    frontier = [root]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if v not in seen and (allowed is None or v in allowed):
                    seen.add(v)
                    nxt.append(v)
        if nxt:
            nxt.sort()
            levels.append(nxt)
        frontier = nxt
    return levels


def _components(adj: Adjacency, vertices: Iterable[int], removed: set[int]) -> list[list[int]]:
    comps = []
    seen = set(removed)
    for s in sorted(vertices):
        if s in seen:
            continue
        seen.add(s)
        comp = [s]
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    comp.append(v)
                    queue.append(v)
        comps.append(sorted(comp))
    return comps


def _largest_component_ok(adj: Adjacency, vertices: Iterable[int], removed: set[int], limit: int) -> bool:
    """True iff every component of vertices minus removed has at most ``limit`` vertices."""
    seen = set(removed)
    for s in vertices:
        if s in seen:
            continue
        seen.add(s)
        size = 1
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    size += 1
                    if size > limit:
                        return False
                    queue.append(v)
    return True


def find_separator(g: Graph | Adjacency) -> Separator:
    """BFS-level separator leaving components of at most 2/3 of the vertices.

    BFS starts at the smallest label; the first level whose removal balances the
    graph is returned. Otherwise the median level is taken and the heaviest
    remaining component is bisected by its own median BFS level until balanced.
    """
    adj = _adjacency_of(g)
    n = len(adj)
    if n < 2:
        return Separator(frozenset(), 0.0)
    limit = (2 * n) // 3
    levels = _bfs_levels(adj, min(adj))
    if sum(len(l) for l in levels) != n:
        raise DisconnectedGraphError("separator input must be connected")
    before = 0
    for lvl in levels:
        if before > limit:
            break
        after = n - before - len(lvl)
        removed = set(lvl)
        if after <= limit or _largest_component_ok(adj, adj.keys(), removed, limit):
            return _make_separator(adj, removed)
        before += len(lvl)

    order = [v for lvl in levels for v in lvl]
    mid = order[n // 2]
    sep = set(next(l for l in levels if mid in l))
    while True:
        comps = _components(adj, adj.keys(), sep)
        heavy = max(comps, key=len, default=[])
        if len(heavy) <= limit:
            return _make_separator(adj, sep)
        allowed = set(heavy)
        sub = _bfs_levels(adj, heavy[0], allowed)
        sub_order = [v for l in sub for v in l]
        m = sub_order[len(sub_order) // 2]
        sep |= set(next(l for l in sub if m in l))


def _make_separator(adj: Adjacency, sep: set[int]) -> Separator:
    n = len(adj)
    comps = _components(adj, adj.keys(), sep)
    worst = max((len(c) for c in comps), default=0)
    return Separator(frozenset(sep), worst / n)


# -- divisions ----------------------------------------------------------------


def _adj_from_edges(edges: Iterable[Edge]) -> dict[int, list[int]]:
    adj: dict[int, list[int]] = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    for vs in adj.values():
        vs.sort()
    return adj


def _greedy_pack(edges: list[Edge], r: int) -> list[list[Edge]]:
    """Pack edges in BFS order into groups touching at most r vertices."""
    adj = _adj_from_edges(edges)
    order: dict[int, int] = {}
    for comp in _components(adj, adj.keys(), set()):
        for lvl in _bfs_levels(adj, comp[0]):
            for v in lvl:
                order[v] = len(order)
    edges = sorted(edges, key=lambda e: (min(order[e[0]], order[e[1]]), max(order[e[0]], order[e[1]])))
    groups: list[list[Edge]] = []
    cur: list[Edge] = []
    verts: set[int] = set()
    for u, v in edges:
        new = len(verts | {u, v})
        if cur and new > r:
            groups.append(cur)
            cur, verts = [], set()
        cur.append((u, v))
        verts |= {u, v}
    if cur:
        groups.append(cur)
    return groups


def _split_region(edges: list[Edge]) -> list[list[Edge]] | None:
    """One separation step; None when it makes no progress."""
    adj = _adj_from_edges(edges)
    nv = len(adj)
    sep = set(find_separator(adj).vertices)
    comps = _components(adj, adj.keys(), sep)
    where: dict[int, int] = {}
    for k, comp in enumerate(comps):
        for v in comp:
            where[v] = k
    regions: list[list[Edge]] = [[] for _ in comps]
    region_verts: list[set[int]] = [set(c) for c in comps]
    ss_edges = []
    for u, v in edges:
        if u in where or v in where:
            k = where.get(u, where.get(v))
            regions[k].append((u, v))
            region_verts[k].update((u, v))
        else:
            ss_edges.append((u, v))
    leftover = []
    for u, v in ss_edges:
        for k, vs in enumerate(region_verts):
            if u in vs and v in vs:
                regions[k].append((u, v))
                break
        else:
            leftover.append((u, v))
    if leftover:
        ladj = _adj_from_edges(leftover)
        for comp in _components(ladj, ladj.keys(), set()):
            cs = set(comp)
            regions.append([e for e in leftover if e[0] in cs])
    regions = [reg for reg in regions if reg]
    for reg in regions:
        if len({x for e in reg for x in e}) >= nv:
            return None
    return regions


def _divide_edges(vertices: list[int], edges: list[Edge], r: int) -> list[tuple[list[int], list[Edge]]]:
    """Recursive separation of one subgraph into raw pieces (vertex list, edges)."""
    if not edges:
        return [([v], []) for v in sorted(vertices)]
    adj = _adj_from_edges(edges)
    out: list[tuple[list[int], list[Edge]]] = []
    # isolated vertices get their own piece
    for v in sorted(set(vertices) - adj.keys()):
        out.append(([v], []))
    todo = []
    for comp in _components(adj, adj.keys(), set()):
        cs = set(comp)
        todo.append([e for e in edges if e[0] in cs])
    stack = list(reversed(todo))
    while stack:
        reg = stack.pop()
        verts = sorted({x for e in reg for x in e})
        if len(verts) <= r:
            out.append((verts, sorted(reg)))
            continue
        parts = _split_region(reg) if r >= 2 else None
        if parts is None:
            for grp in _greedy_pack(reg, max(r, 2)):
                out.append((sorted({x for e in grp for x in e}), sorted(grp)))
            continue
        parts.sort(key=lambda es: min(x for e in es for x in e))
        stack.extend(reversed(parts))
    return out


def _finalize(raw: list[tuple[list[int], list[Edge]]], r: int) -> RelaxedDivision:
    """Reassign each edge to the smallest piece containing both endpoints, prune
    vertices without an owned edge, drop empty pieces and flag boundaries."""
    vsets = [set(vs) for vs, _ in raw]
    containing: dict[int, list[int]] = {}
    for pid, vs in enumerate(vsets):
        for v in vs:
            containing.setdefault(v, []).append(pid)
    owned: list[list[Edge]] = [[] for _ in raw]
    for _, es in raw:
        for u, v in es:
            cu, cv = containing[u], set(containing[v])
            owner = next(p for p in cu if p in cv)
            owned[owner].append((u, v))
    final = []
    covered: set[int] = set()
    for pid in range(len(raw)):
        es = sorted(set(owned[pid]))
        if es:
            vs = sorted({x for e in es for x in e})
            covered.update(vs)
            final.append((vs, es))
    # vertices without any edge (edgeless inputs) get singleton pieces
    for v in sorted(set().union(*vsets) - covered if vsets else ()):
        final.append(([v], []))
    occurrences: dict[int, list[int]] = {}
    for pid, (vs, _) in enumerate(final):
        for v in vs:
            occurrences.setdefault(v, []).append(pid)
    pieces = []
    owner_map: dict[Edge, int] = {}
    for pid, (vs, es) in enumerate(final):
        bd = frozenset(v for v in vs if len(occurrences[v]) > 1)
        pieces.append(Piece(pid, tuple(vs), tuple(es), bd))
        for e in es:
            owner_map[e] = pid
    return RelaxedDivision(pieces, r, None, owner_map, occurrences)


def divide_subgraph(vertices: Iterable[int], edges: Iterable[Edge], r: int) -> RelaxedDivision:
    """Relaxed division of an arbitrary (possibly disconnected) subgraph."""
    if r < 1:
        raise DivisionError("piece size r must be >= 1")
    vertices = sorted(set(vertices))
    edges = sorted({norm_edge(u, v) for u, v in edges})
    return _finalize(_divide_edges(vertices, edges, r), r)


def relaxed_division(g: Graph, r: int) -> RelaxedDivision:
    if g.n == 0:
        raise DivisionError("empty graph")
    if not 1 <= r <= g.n:
        raise DivisionError(f"r={r} outside 1..{g.n}")
    if not g.is_connected():
        raise DisconnectedGraphError("graph is not connected")
    return divide_subgraph(range(1, g.n + 1), g.edges(), max(r, 2) if g.n >= 2 else r)


def nested_division(g: Graph, r: int, r_tilde: int) -> NestedDivision:
    if not 1 <= r_tilde <= r:
        raise DivisionError(f"need 1 <= r_tilde <= r, got r={r}, r_tilde={r_tilde}")
    mini = relaxed_division(g, r)
    rt = max(r_tilde, 2) if g.n >= 2 else r_tilde
    micro = [divide_subgraph(p.vertices, p.edges, rt) for p in mini.pieces]
    return NestedDivision(mini, micro, r, r_tilde)


# -- classification and statistics -----------------------------------------


def classify_edge(d: NestedDivision, e: Edge, level: str = "mini", piece: int | None = None) -> str:
    """'boundary', 'non-boundary' or 'transitional' for an edge at the given level.

    At the micro level ``piece`` names the mini piece whose division is used;
    it defaults to the mini piece owning the edge.
    """
    u, v = norm_edge(*e)
    if (u, v) not in d.mini.edge_owner:
        raise KeyError(f"unknown edge {e}")
    if level == "mini":
        div = d.mini
    elif level == "micro":
        pid = d.mini.edge_owner[(u, v)] if piece is None else piece
        if not 0 <= pid < len(d.micro):
            raise VertexRangeError(f"unknown mini piece {pid}")
        div = d.micro[pid]
        if (u, v) not in div.edge_owner:
            raise KeyError(f"edge {e} not in mini piece {pid}")
    else:
        raise ValueError(f"unknown level {level!r}")
    bu, bv = div.is_boundary(u), div.is_boundary(v)
    if bu and bv:
        return "boundary"
    if not bu and not bv:
        return "non-boundary"
    return "transitional"


def duplicate_stats(d: NestedDivision) -> dict[str, int]:
    mini_dupes = d.mini.duplicates()
    micro_dupes = sum(div.duplicates() for div in d.micro)
    return {
        "mini_duplicates": mini_dupes,
        "micro_duplicates": micro_dupes,
        "per_piece_boundary_max": max((len(p.boundary) for p in d.mini.pieces), default=0),
        "micro_piece_boundary_max": max(
            (len(p.boundary) for div in d.micro for p in div.pieces), default=0
        ),
        "mini_pieces": len(d.mini.pieces),
        "micro_pieces": sum(len(div.pieces) for div in d.micro),
    }


def dump_division(div: RelaxedDivision) -> str:
    lines = []
    for p in div.pieces:
        vs = ",".join(map(str, p.vertices))
        bd = ",".join(map(str, sorted(p.boundary)))
        es = ",".join(f"{u}-{v}" for u, v in p.edges)
        lines.append(f"piece {p.id}: vertices={vs} boundary={bd} edges={es}")
    return "\n".join(lines) + "\n"


def assemble_division(pieces: list[tuple[list[int], list[Edge]]], r: int) -> RelaxedDivision:
    """Rebuild a division from finished (vertices, owned edges) pieces."""
    return _finalize([(list(vs), [norm_edge(*e) for e in es]) for vs, es in pieces], r)
