"""Property checks of a built encoding against brute-force references.

Used by the ``verify`` command and by the acceptance tests. Every check
returns a :class:`CheckResult` instead of raising, so a caller can report
all properties at once.
"""
from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from itertools import combinations

from . import container
from .dfs import augmented_count, back_edges, dfs, entry_exit_log, parent, preorder
from .encoding import Encoding, build_encoding
from .graph import Graph
from .meta import preprocess_meta, resolver
from .oracle import naive_dfs, naive_lowpoints, offline_lca


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {self.name}" + (f": {self.detail}" if self.detail else "")


def _fail(name: str, detail: str) -> CheckResult:
    return CheckResult(name, False, detail)


def check_division(enc: Encoding) -> CheckResult:
    """Every edge owned exactly once per level; pieces within their size caps."""
    name = "division"
    d = enc.division
    g = enc.graph
    owned = Counter(e for p in d.mini.pieces for e in p.edges)
    if set(owned) != set(g.edges()) or any(c != 1 for c in owned.values()):
        return _fail(name, "mini edge ownership is not a partition")
    covered = set()
    for p in d.mini.pieces:
        if len(p.vertices) > d.r:
            return _fail(name, f"mini piece {p.id} has {len(p.vertices)} > r={d.r} vertices")
        vs = set(p.vertices)
        if any(a not in vs or b not in vs for a, b in p.edges):
            return _fail(name, f"mini piece {p.id} owns an edge leaving it")
        covered |= vs
    if g.n > 1 and covered != set(g.vertices()):
        return _fail(name, "mini pieces do not cover every vertex")
    occ = Counter(u for p in d.mini.pieces for u in p.vertices)
    boundary = {u for u, c in occ.items() if c > 1}
    if boundary != {u for u in g.vertices() if enc.boundary_fid.access(u)}:
        return _fail(name, "boundary dictionary disagrees with piece overlaps")
    for p, sub in zip(d.mini.pieces, d.micro):
        owned = Counter(e for q in sub.pieces for e in q.edges)
        if set(owned) != set(p.edges) or any(c != 1 for c in owned.values()):
            return _fail(name, f"micro edge ownership in mini piece {p.id} is not a partition")
        for q in sub.pieces:
            if len(q.vertices) > d.r_tilde:
                return _fail(name, f"micro piece ({p.id},{q.id}) exceeds r~={d.r_tilde}")
    return CheckResult(name, True, f"{len(d.mini.pieces)} mini, {enc.micro_count()} micro pieces")


def check_translation(enc: Encoding) -> CheckResult:
    """graph -> mini -> micro -> mini -> graph is the identity on every occurrence."""
    name = "translation"
    for u in enc.graph.vertices():
        minis = enc.to_mini(u)
        if not minis or (len(minis) > 1) != enc.is_mini_boundary(u):
            return _fail(name, f"vertex {u}: wrong mini occurrence count")
        for ml in minis:
            if enc.to_graph(ml) != u:
                return _fail(name, f"vertex {u}: {ml} maps back to {enc.to_graph(ml)}")
            micros = enc.to_micro(ml)
            if not micros or (len(micros) > 1) != enc.is_micro_boundary(ml):
                return _fail(name, f"{ml}: wrong micro occurrence count")
            for mc in micros:
                if enc.micro_to_mini(mc) != ml or enc.to_graph(mc) != u:
                    return _fail(name, f"{mc} does not map back to {ml}")
    return CheckResult(name, True)


def check_level_edges(enc: Encoding) -> CheckResult:
    name = "level-neighbours"
    seen = Counter()
    for u in enc.graph.vertices():
        for w in enc.level_neighbors(u):
            seen[(min(u, w), max(u, w))] += 1
    want = Counter({e: 2 for e in enc.graph.edges()})
    if seen != want:
        return _fail(name, "neighbour iteration does not list every edge twice")
    return CheckResult(name, True)


def check_palm_tree(enc: Encoding) -> CheckResult:
    """Overlay is a spanning tree at the start vertex; non-tree edges join ancestor pairs."""
    name = "palm-tree"
    ov = enc.overlay
    order = preorder(enc)
    g = enc.graph
    if order[:1] != [ov.root] or sorted(order) != list(g.vertices()):
        return _fail(name, "preorder is not a permutation starting at the root")
    pos = {v: k for k, v in enumerate(order)}
    par = {v: parent(enc, v) for v in g.vertices()}
    tree = set()
    for v, p in par.items():
        if v == ov.root:
            if p is not None:
                return _fail(name, "root has a parent")
            continue
        if p is None or pos[p] >= pos[v] or not g.has_edge(p, v):
            return _fail(name, f"bad tree edge into {v}")
        tree.add((min(p, v), max(p, v)))
    depth = {}
    for v in order:
        depth[v] = 0 if v == ov.root else depth[par[v]] + 1

    def is_ancestor(a: int, b: int) -> bool:
        while depth[b] > depth[a]:
            b = par[b]
        return a == b

    for a, b in g.edges():
        if (a, b) in tree:
            continue
        lo, hi = (a, b) if pos[a] < pos[b] else (b, a)
        if not is_ancestor(lo, hi):
            return _fail(name, f"cross edge {a}-{b}")
    return CheckResult(name, True)


def check_replay(enc: Encoding) -> CheckResult:
    """Preorder, parents and back-edge directions equal the brute-force DFS in the same neighbour order."""
    name = "oracle-replay"
    ov = enc.overlay
    p = naive_dfs(enc.graph, ov.root, lambda u: list(enc.level_neighbors(u)))
    if preorder(enc) != p.preorder:
        return _fail(name, "preorder differs")
    for v in enc.graph.vertices():
        want = p.parent[v] or None
        if parent(enc, v) != want:
            return _fail(name, f"parent of {v} differs")
    if back_edges(enc) != sorted(p.back_edges):
        return _fail(name, "back edges differ")
    return CheckResult(name, True)


def check_meta(enc: Encoding, lca_pairs: int = 10_000, seed: int = 0) -> list[CheckResult]:
    """st, depth, descendants, lowpoint per vertex; lca on random pairs, plus all pairs for n <= 64."""
    ov = enc.overlay
    p = naive_dfs(enc.graph, ov.root, lambda u: list(enc.level_neighbors(u)))
    lp = naive_lowpoints(p)
    res = resolver(enc)
    out = []
    for name, got, want in (
        ("st_number", res.st, p.st.__getitem__),
        ("depth", res.depth, p.depth.__getitem__),
        ("num_descendants", res.nd, p.size.__getitem__),
        ("lowpoint", res.lowpoint, lp.__getitem__),
    ):
        bad = next((v for v in enc.graph.vertices() if got(v) != want(v)), None)
        out.append(_fail(name, f"vertex {bad}: {got(bad)} != {want(bad)}") if bad else CheckResult(name, True))
    n = enc.graph.n
    rng = random.Random(seed)
    pairs = [(rng.randint(1, n), rng.randint(1, n)) for _ in range(lca_pairs)]
    if n <= 64:
        pairs += list(combinations(range(1, n + 1), 2)) + [(v, v) for v in range(1, n + 1)]
    want = offline_lca(p, pairs)
    bad = next((k for k, (a, b) in enumerate(pairs) if res.lca(a, b) != want[k]), None)
    if bad is not None:
        a, b = pairs[bad]
        out.append(_fail("lca", f"lca({a},{b}) = {res.lca(a, b)}, expected {want[bad]}"))
    else:
        out.append(CheckResult("lca", True, f"{len(pairs)} pairs"))
    return out


def pair_bound_slack(enc: Encoding) -> int:
    """min over pieces of 2k+2 - (#entry-exit pairs); negative means the bound is broken."""
    slack = []
    for i in range(enc.mini_count()):
        slack.append(2 * augmented_count(enc, i, "mini") + 2 - len(entry_exit_log(enc, i, "mini")))
        for j in range(enc.micro_count(i)):
            k = augmented_count(enc, (i, j))
            slack.append(2 * k + 2 - len(entry_exit_log(enc, (i, j))))
    return min(slack, default=0)


def check_pair_bound(enc: Encoding) -> CheckResult:
    slack = pair_bound_slack(enc)
    return CheckResult("entry-exit-bound", slack >= 0, f"min slack {slack}")


def augmented_occurrences(enc: Encoding) -> int:
    return sum(len(enc.catalog.key(idx).augmented) for row in enc.micro_index for idx in row)


def check_color_swaps(enc: Encoding) -> CheckResult:
    """Each augmented occurrence is recoloured exactly twice (white->gray->black)."""
    occ = augmented_occurrences(enc)
    swaps = enc.overlay.color_swaps
    return CheckResult("color-swaps", swaps == 2 * occ, f"{swaps} swaps for {occ} occurrences")


def check_round_trip(enc: Encoding) -> CheckResult:
    name = "container-round-trip"
    data = container.dumps(enc)
    back = container.loads(data)
    if container.dumps(back) != data:
        return _fail(name, "re-saved container differs")
    a, b = resolver(enc), resolver(back)
    for v in enc.graph.vertices():
        if (a.st(v), a.lowpoint(v)) != (b.st(v), b.lowpoint(v)):
            return _fail(name, f"answers for {v} differ after reload")
    return CheckResult(name, True, f"{len(data)} bytes")


def verify_encoding(enc: Encoding, lca_pairs: int = 10_000, seed: int = 0) -> list[CheckResult]:
    """All properties of an encoding that already carries a DFS overlay and meta data."""
    results = [check_division(enc), check_translation(enc), check_level_edges(enc)]
    results += [check_palm_tree(enc), check_replay(enc), check_pair_bound(enc), check_color_swaps(enc)]
    results += check_meta(enc, lca_pairs, seed)
    results.append(check_round_trip(enc))
    return results


def verify_graph(
    g: Graph, start: int = 1, r: int | None = None, r_tilde: int | None = None, lca_pairs: int = 10_000, seed: int = 0
) -> list[CheckResult]:
    enc = build_encoding(g, r, r_tilde)
    dfs(enc, start)
    preprocess_meta(enc)
    return verify_encoding(enc, lca_pairs, seed)


__all__ = [
    "CheckResult",
    "augmented_occurrences",
    "check_color_swaps",
    "check_division",
    "check_level_edges",
    "check_meta",
    "check_pair_bound",
    "check_palm_tree",
    "check_replay",
    "check_round_trip",
    "check_translation",
    "pair_bound_slack",
    "verify_encoding",
    "verify_graph",
]
