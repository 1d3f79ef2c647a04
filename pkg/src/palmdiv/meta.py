"""Meta queries on the stored palm tree: preorder number, depth, subtree size,
lowpoint and lowest common ancestor.

Values are kept on three tiers. Explicit vertices (mini-boundary vertices and
the root) store plain values. Micro-boundary vertices store anchors into the
mini-level run structure whose offsets are bounded by the mini piece size.
All other vertices are resolved through their catalog entry, which yields an
anchor on an augmented vertex of the same micro piece.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field

from .catalog import shrink_forest
from .dfs import DfsStateError, Overlay, parent as tree_parent
from .encoding import Encoding, _bits


class MetaStateError(DfsStateError):
    pass


class EulerLca:
    """LCA over a rooted forest via Euler tour and block-decomposed sparse table.

    ``parent`` maps every node to its parent (0 for roots). Queries on nodes
    of different trees return 0.
    """

    def __init__(self, parent: dict[int, int]):
        children: dict[int, list[int]] = {0: []}
        for v in sorted(parent):
            children.setdefault(v, [])
            children.setdefault(parent[v], []).append(v)
        self.children = children
        self.parent = parent
        euler: list[int] = []
        depth: list[int] = []
        first: dict[int, int] = {}
        stack = [(0, 0, 0)]
        while stack:
            v, k, d = stack.pop()
            if k == 0:
                first[v] = len(euler)
            euler.append(v)
            depth.append(d)
            cs = children[v]
            if k < len(cs):
                stack.append((v, k + 1, d))
                stack.append((cs[k], 0, d + 1))
        self.euler = euler
        self.depth = depth
        self.first = first
        self.child_first = {v: [first[c] for c in cs] for v, cs in children.items() if cs}
        # block minima with a sparse table on top
        m = len(euler)
        b = max(1, m.bit_length())
        self.block = b
        mins = []
        for s in range(0, m, b):
            best = s
            for t in range(s + 1, min(m, s + b)):
                if depth[t] < depth[best]:
                    best = t
            mins.append(best)
        table = [mins]
        span = 1
        while 2 * span <= len(mins):
            prev = table[-1]
            row = []
            for i in range(len(mins) - 2 * span + 1):
                a, c = prev[i], prev[i + span]
                row.append(a if depth[a] <= depth[c] else c)
            table.append(row)
            span *= 2
        self.table = table

    def __len__(self) -> int:
        return len(self.parent)

    def _scan(self, lo: int, hi: int) -> int:
        depth = self.depth
        best = lo
        for t in range(lo + 1, hi + 1):
            if depth[t] < depth[best]:
                best = t
        return best

    def _rmq(self, lo: int, hi: int) -> int:
        b = self.block
        bl, bh = lo // b, hi // b
        if bl == bh:
            return self._scan(lo, hi)
        depth = self.depth
        best = self._scan(lo, (bl + 1) * b - 1)
        right = self._scan(bh * b, hi)
        if depth[right] < depth[best]:
            best = right
        if bl + 1 <= bh - 1:
            lvl = (bh - 1 - (bl + 1) + 1).bit_length() - 1
            row = self.table[lvl]
            for cand in (row[bl + 1], row[bh - 1 - (1 << lvl) + 1]):
                if depth[cand] < depth[best]:
                    best = cand
        return best

    def lca(self, a: int, c: int) -> int:
        fa, fc = self.first[a], self.first[c]
        if fa > fc:
            fa, fc = fc, fa
        return self.euler[self._rmq(fa, fc)]

    def child_toward(self, a: int, c: int) -> int:
        """Child of ``a`` on the path to its proper descendant ``c``."""
        cf = self.child_first[a]
        return self.children[a][bisect_right(cf, self.first[c]) - 1]

    def space_bits(self) -> int:
        k = max(2, len(self.parent))
        m = len(self.euler)
        w = _bits(m)
        bits = m * _bits(k) + m  # node per tour step, +-1 depth steps
        bits += k * w + k * _bits(k)  # first occurrence and parent
        bits += sum(len(row) for row in self.table) * w
        return bits


@dataclass
class Meta:
    x_st: dict[int, int] = field(default_factory=dict)
    x_depth: dict[int, int] = field(default_factory=dict)
    x_nd: dict[int, int] = field(default_factory=dict)
    x_lp: dict[int, int] = field(default_factory=dict)
    y_st: dict[int, tuple[str, int, int]] = field(default_factory=dict)
    y_entry: dict[int, int] = field(default_factory=dict)
    y_depth: dict[int, int] = field(default_factory=dict)
    y_end: dict[int, tuple] = field(default_factory=dict)
    y_lp: dict[int, tuple[str, int]] = field(default_factory=dict)
    gaps: dict[tuple[int, int], int] = field(default_factory=dict)
    block_first: dict[tuple[int, int, int], tuple[str, int, int]] = field(default_factory=dict)
    order_bits: int = 0
    shrunk: EulerLca | None = None
    shrunk_mini: list[EulerLca] = field(default_factory=list)
    n: int = 0
    r: int = 0

    def space_bits(self) -> int:
        lw = _bits(self.n)
        mw = _bits(self.r)
        bits = 4 * lw * len(self.x_st) + lw * len(self.gaps)
        per_y = (2 + 2 * mw) + mw + mw + (1 + 2 + 2 * mw) + (1 + mw)
        bits += per_y * len(self.y_st)
        bits += (2 + 2 * mw) * len(self.block_first)
        bits += self.order_bits
        if self.shrunk is not None:
            bits += self.shrunk.space_bits()
        bits += sum(s.space_bits() for s in self.shrunk_mini)
        return bits


def _require(enc: Encoding) -> Meta:
    if enc.meta is None:
        if enc.overlay is None:
            raise MetaStateError("no DFS has been run on this encoding")
        raise MetaStateError("meta data not preprocessed; call preprocess_meta")
    return enc.meta


class _Resolver:
    """Evaluates stored anchors against an encoding."""

    def __init__(self, enc: Encoding, meta: Meta):
        self.enc = enc
        self.m = meta
        self._labels: dict[tuple[int, int], tuple[int, ...]] = {}

    def labels(self, i: int, j: int) -> tuple[int, ...]:
        t = self._labels.get((i, j))
        if t is None:
            t = self.enc.micro_locals_to_graph(i, j)
            self._labels[(i, j)] = t
        return t

    def home(self, u: int):
        mc = self.enc.occurrences(u)[0]
        e = self.enc.catalog.entry(self.enc.micro_index[mc.mini_piece][mc.micro_piece])
        return mc, e, self.labels(mc.mini_piece, mc.micro_piece)

    def mini_of(self, u: int) -> int:
        return self.enc.home_mini[u]

    def mini_value(self, anchor: tuple[str, int, int], i: int) -> int:
        kind, ref, off = anchor
        m = self.m
        if kind == "exit":
            return m.x_st[ref] + off
        if kind == "after":
            return m.x_st[ref] + m.x_nd[ref] + off
        return m.x_st[ref] + 1 + m.gaps[(i, ref)] + off

    def st(self, u: int) -> int:
        m = self.m
        if u in m.x_st:
            return m.x_st[u]
        if u in m.y_st:
            return self.mini_value(m.y_st[u], self.mini_of(u))
        mc, e, gl = self.home(u)
        ref, off, kind = e.local_offset(mc.label)
        if kind == "exit":
            return self.st(gl[ref - 1]) + off
        if kind == "after":
            x = gl[ref - 1]
            return self.st(x) + self.nd(x) + off
        return self.mini_value(m.block_first[(mc.mini_piece, mc.micro_piece, ref)], mc.mini_piece) + off - 1

    def _end(self, anchor: tuple, i: int) -> int:
        kind, ref = anchor
        if kind == "v":
            return self.mini_value(ref, i)
        return self.m.x_st[ref] + self.m.x_nd[ref] - 1

    def nd(self, u: int) -> int:
        m = self.m
        if u in m.x_nd:
            return m.x_nd[u]
        if u in m.y_end:
            return self._end(m.y_end[u], self.mini_of(u)) - self.st(u) + 1
        mc, e, gl = self.home(u)
        kind, w = e.end_anchor(mc.label)
        wg = gl[w - 1]
        end = self.st(wg) if kind == "v" else self.st(wg) + self.nd(wg) - 1
        return end - self.st(u) + 1

    def depth(self, u: int) -> int:
        m = self.m
        if u in m.x_depth:
            return m.x_depth[u]
        if u in m.y_depth:
            return m.x_depth[m.y_entry[u]] + m.y_depth[u]
        mc, e, gl = self.home(u)
        return self.depth(gl[e.run_entry(mc.label) - 1]) + e.run_depth(mc.label)

    def lowpoint(self, u: int) -> int:
        m = self.m
        if u in m.x_lp:
            return m.x_lp[u]
        if u in m.y_lp:
            kind, ref = m.y_lp[u]
            return self.st(ref) if kind == "st" else m.x_lp[ref]
        mc, e, gl = self.home(u)
        ref, kind = e.local_lowpoint(mc.label)
        return self.st(gl[ref - 1]) if kind == "st" else self.lowpoint(gl[ref - 1])

    # -- lca -----------------------------------------------------------------

    def is_aug(self, u: int) -> bool:
        return u in self.m.x_st or u in self.m.y_st

    def rep_explicit(self, u: int) -> int:
        m = self.m
        if u in m.x_st:
            return u
        if u in m.y_entry:
            return m.y_entry[u]
        mc, e, gl = self.home(u)
        return self.rep_explicit(gl[e.run_entry(mc.label) - 1])

    def rep_aug(self, u: int) -> int:
        if self.is_aug(u):
            return u
        mc, e, gl = self.home(u)
        return gl[e.run_entry(mc.label) - 1]

    def local_lca(self, u: int, w: int) -> int:
        mc, e, gl = self.home(u)
        mw = self.enc.occurrences(w)[0]
        return gl[e.local_lca(mc.label, mw.label) - 1]

    def _entry_point(self, s: EulerLca, a: int, c: int, u: int) -> int:
        # where the tree path from u climbs into the region owned by a
        return u if a == c else tree_parent(self.enc, s.child_toward(a, c))

    def lca(self, u: int, w: int) -> int:
        if u == w:
            return u
        cu, cw = self.rep_explicit(u), self.rep_explicit(w)
        s = self.m.shrunk
        a = cu if cu == cw else s.lca(cu, cw)
        if not a:
            raise MetaStateError(f"{u} and {w} lie in different trees")
        qu, qw = self._entry_point(s, a, cu, u), self._entry_point(s, a, cw, w)
        if a in (qu, qw):
            return a
        i = self.mini_of(qu)
        return self.lca_mini(i, qu, qw) if i == self.mini_of(qw) else a

    def lca_mini(self, i: int, u: int, w: int) -> int:
        """LCA of two vertices of mini piece i joined by tree edges inside it."""
        if u == w:
            return u
        cu, cw = self.rep_aug(u), self.rep_aug(w)
        s = self.m.shrunk_mini[i]
        a = cu if cu == cw else s.lca(cu, cw)
        qu, qw = self._entry_point(s, a, cu, u), self._entry_point(s, a, cw, w)
        if a in (qu, qw):
            return a
        if self.enc.occurrences(qu)[0].micro_piece == self.enc.occurrences(qw)[0].micro_piece:
            return self.local_lca(qu, qw)
        return a


def _segment_anchor(ov: Overlay, i: int, si: int, s: int) -> tuple[str, int, int]:
    seg = ov.mini_segments[i][si]
    if seg.exit:
        return ("exit", seg.exit, s - seg.exit_st)
    if seg.prev_exit:
        return ("after", seg.prev_exit, s - seg.start)
    return ("entry", seg.entry, s - seg.start)


def preprocess_meta(enc: Encoding) -> Meta:
    ov = enc.overlay
    if ov is None:
        raise MetaStateError("no DFS has been run on this encoding")
    cat = enc.catalog
    r = enc.r
    meta = Meta(n=enc.n, r=r)
    for x in sorted(ov.explicit):
        meta.x_st[x] = ov.st[x]
        meta.x_depth[x] = ov.depth[x]
        meta.x_nd[x] = ov.nd[x]
        meta.x_lp[x] = ov.lp[x]
    for i, segs in enumerate(ov.mini_segments):
        for seg in segs:
            if not seg.prev_exit:
                meta.gaps[(i, seg.entry)] = seg.start - ov.st[seg.entry] - 1

    def bounded(anchor: tuple[str, int, int]) -> tuple[str, int, int]:
        if abs(anchor[2]) > r:
            raise AssertionError(f"mini offset {anchor} exceeds piece size {r}")
        return anchor

    for y in sorted(ov.mini_entry):
        i, si, s = ov.seg_of[y]
        meta.y_st[y] = bounded(_segment_anchor(ov, i, si, s))
        meta.y_entry[y] = ov.mini_entry[y]
        d = ov.depth[y] - ov.depth[ov.mini_entry[y]]
        if not 0 < d <= r:
            raise AssertionError(f"mini depth offset {d} out of range")
        meta.y_depth[y] = d
        kind, ref = ov.end_anchor[y]
        meta.y_end[y] = ("v", bounded(_segment_anchor(ov, *ref))) if kind == "v" else (kind, ref)
        meta.y_lp[y] = ov.lp_anchor[y]
    for key, first in sorted(ov.block_first.items()):
        i, si, s = ov.seg_of[first]
        meta.block_first[key] = bounded(_segment_anchor(ov, i, si, s))
    enc.meta = meta
    res = _Resolver(enc, meta)

    # lowpoint order augmentation of every micro piece with augmented exits
    lw = 1
    for i, row in enumerate(enc.micro_index):
        for j, idx in enumerate(row):
            e = cat.entry(idx)
            gl = res.labels(i, j)
            exits = [x for x in e.key.augmented if e.parent(x)]
            if not exits:
                continue
            sts = sorted((res.st(gl[v - 1]), v) for v in range(1, e.k + 1))
            by_st = {s: v for s, v in sts}
            keys = [s for s, _ in sts]
            order = []
            for x in exits:
                val = res.lowpoint(gl[x - 1])
                carrier = by_st.get(val, 0)
                rank = bisect_right(keys, val) if not carrier else 0
                order.append((val, x, carrier, rank))
            order.sort()
            row[j] = cat.with_order(idx, tuple((x, c, rk) for _, x, c, rk in order))
            lw = _bits(e.k)
            meta.order_bits += len(order) * 3 * lw

    # shrunken forests: per mini piece over its augmented vertices, then globally over explicit ones
    global_parent: dict[int, int] = {}
    for i, row in enumerate(enc.micro_index):
        par: dict[int, int] = {}
        for j, idx in enumerate(row):
            e = cat.entry(idx)
            gl = res.labels(i, j)
            for v, p in e.shrunken_tree(e.key.augmented).items():
                vg = gl[v - 1]
                if p or vg not in par:
                    par[vg] = gl[p - 1] if p else 0
        full = EulerLca(par)
        important = {v for v in par if v in ov.explicit}
        for v, p in shrink_forest(par, full.children, _preorder(full), important).items():
            if p or v not in global_parent:
                global_parent[v] = p
        meta.shrunk_mini.append(EulerLca(_restrict(par, res.is_aug)))
    meta.shrunk = EulerLca(_restrict(global_parent, ov.explicit.__contains__))
    return meta


def _restrict(parent: dict[int, int], keep) -> dict[int, int]:
    """Forest on the kept vertices, each linked to its nearest kept proper ancestor."""
    out: dict[int, int] = {}
    for v in parent:
        if not keep(v):
            continue
        p = parent[v]
        while p and not keep(p):
            p = parent[p]
        out[v] = p
    return out


def _preorder(t: EulerLca) -> list[int]:
    return sorted((v for v in t.first if v), key=t.first.__getitem__)


def st_number(enc: Encoding, u: int) -> int:
    enc._check_vertex(u)
    return _Resolver(enc, _require(enc)).st(u)


def depth(enc: Encoding, u: int) -> int:
    enc._check_vertex(u)
    return _Resolver(enc, _require(enc)).depth(u)


def num_descendants(enc: Encoding, u: int) -> int:
    enc._check_vertex(u)
    return _Resolver(enc, _require(enc)).nd(u)


def lowpoint(enc: Encoding, u: int) -> int:
    enc._check_vertex(u)
    return _Resolver(enc, _require(enc)).lowpoint(u)


def lca(enc: Encoding, u: int, v: int) -> int:
    enc._check_vertex(u)
    enc._check_vertex(v)
    return _Resolver(enc, _require(enc)).lca(u, v)


def resolver(enc: Encoding) -> _Resolver:
    """Reusable evaluator for many queries on one preprocessed encoding."""
    return _Resolver(enc, _require(enc))
