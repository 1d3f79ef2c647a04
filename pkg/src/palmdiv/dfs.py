"""Iterator-based DFS executed on the nested division encoding.

Explicit vertices (mini-boundary vertices and the root) and micro-boundary
vertices each own an iterator over their micro-piece occurrences. Entering a
micro piece, or backtracking into it, is one catalog transition that advances
the piece-local traversal up to the next augmented vertex. No vertex stack is
kept: after a vertex finishes, control returns along stored parents.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator

from .catalog import BLACK, GRAY, EntryExitPair
from .encoding import Encoding, MicroLabel, _bits
from .graph import VertexRangeError

log = logging.getLogger(__name__)


class DfsStateError(RuntimeError):
    pass


class DfsConsistencyError(RuntimeError):
    pass


@dataclass
class MiniSegment:
    """Stretch of the traversal spent inside one mini piece between two
    explicit-vertex events."""

    entry: int
    start: int  # preorder number of the first vertex visited in the segment
    prev_exit: int = 0  # explicit vertex whose subtree finished right before (resumed run)
    exit: int = 0  # explicit exit vertex, 0 for null
    exit_st: int = 0


@dataclass
class _MiniRun:
    entry: int
    paused_at: int = 0
    last: tuple = ("v", 0)  # ("v", (mini, segment, st)) or ("end", explicit exit)
    segment: int = -1


@dataclass
class Overlay:
    """Palm tree stored on top of an encoding.

    Values in ``st``, ``depth``, ``nd`` and ``lp`` cover augmented vertices
    only and are the working values produced during the traversal; the meta
    layer condenses them into explicit arrays and bounded anchors.
    """

    root: int
    explicit: set[int]
    st: dict[int, int] = field(default_factory=dict)
    depth: dict[int, int] = field(default_factory=dict)
    nd: dict[int, int] = field(default_factory=dict)
    lp: dict[int, int] = field(default_factory=dict)
    parent: dict[int, int] = field(default_factory=dict)
    disc: dict[int, tuple[int, int]] = field(default_factory=dict)
    child_pieces: dict[int, list[int]] = field(default_factory=dict)
    occ: dict[int, list[MicroLabel]] = field(default_factory=dict)
    mini_pairs: list[list[EntryExitPair]] = field(default_factory=list)
    mini_segments: list[list[MiniSegment]] = field(default_factory=list)
    seg_of: dict[int, tuple[int, int, int]] = field(default_factory=dict)  # vertex -> (mini, segment, st)
    block_first: dict[tuple[int, int, int], int] = field(default_factory=dict)
    mini_entry: dict[int, int] = field(default_factory=dict)  # Y vertex -> entry of its mini run
    end_anchor: dict[int, tuple] = field(default_factory=dict)
    lp_anchor: dict[int, tuple[str, int]] = field(default_factory=dict)
    block_start: dict[tuple[int, int, int], int] = field(default_factory=dict)
    color_swaps: int = 0
    advances: int = 0
    visited: int = 0

    def space_bits(self) -> int:
        """Bits of the stored overlay (excluding working values handed to the meta layer)."""
        n = max(2, self.visited)
        lw = _bits(n) + 1
        bits = 0
        for v in self.explicit:
            bits += 2 * lw  # parent and discovering piece
            bits += len(self.child_pieces.get(v, ())) * _bits(max(1, len(self.occ.get(v, ()))))
        ys = [v for v in self.occ if v not in self.explicit]
        for v in ys:
            bits += _bits(max(1, len(self.occ[v]))) + len(self.child_pieces.get(v, ())) * _bits(len(self.occ[v]))
        return bits


def _is_explicit(enc: Encoding, u: int, root: int) -> bool:
    return u == root or bool(enc.boundary_fid.access(u))


def dfs(enc: Encoding, start: int) -> Overlay:
    """Run the DFS from ``start`` and store the palm tree in ``enc``."""
    g = enc.graph
    if not (isinstance(start, int) and 1 <= start <= g.n):
        raise VertexRangeError(f"start vertex {start!r} not in 1..{g.n}")
    cat = enc.catalog
    enc.meta = None
    enc.micro_index = [list(row) for row in enc.initial_index]
    index = enc.micro_index
    for mc in enc.occurrences(start):
        i, j = mc.mini_piece, mc.micro_piece
        index[i][j] = cat.intern(enc.base_key(i, j, start))

    explicit = {start} | set(enc.boundary_fid.ones_positions())
    ov = Overlay(root=start, explicit=explicit)
    ov.mini_pairs = [[] for _ in range(enc.mini_count())]
    ov.mini_segments = [[] for _ in range(enc.mini_count())]
    mstack: list[list[_MiniRun]] = [[] for _ in range(enc.mini_count())]
    cur_mini: dict[int, int] = {}
    labels_cache: dict[tuple[int, int], tuple[int, ...]] = {}

    def labels(i: int, j: int) -> tuple[int, ...]:
        t = labels_cache.get((i, j))
        if t is None:
            t = enc.micro_locals_to_graph(i, j)
            labels_cache[(i, j)] = t
        return t

    cnt = 0

    def occ_of(v: int) -> list[MicroLabel]:
        o = ov.occ.get(v)
        if o is None:
            o = enc.occurrences(v)
            ov.occ[v] = o
        return o

    def recolor(v: int, color: int) -> None:
        for mc in occ_of(v):
            i, j = mc.mini_piece, mc.micro_piece
            new = cat.set_color(index[i][j], mc.label, color)
            if new != index[i][j]:
                ov.color_swaps += 1
            index[i][j] = new

    def active_run(i: int) -> _MiniRun:
        st = mstack[i]
        if not st or st[-1].paused_at:
            raise DfsConsistencyError(f"no active run in mini piece {i}")
        return st[-1]

    def open_segment(i: int, run: _MiniRun, prev_exit: int) -> None:
        ov.mini_segments[i].append(MiniSegment(run.entry, cnt + 1, prev_exit))
        run.segment = len(ov.mini_segments[i]) - 1

    def close_segment(i: int, run: _MiniRun, exit_: int) -> None:
        seg = ov.mini_segments[i][run.segment]
        seg.exit = exit_
        seg.exit_st = cnt + 1 if exit_ else 0
        ov.mini_pairs[i].append(EntryExitPair(run.entry, exit_))

    def touch(i: int, s: int) -> None:
        run = active_run(i)
        run.last = ("v", (i, run.segment, s))

    def record(i: int, u: int, s: int) -> None:
        ov.seg_of[u] = (i, active_run(i).segment, s)

    def visit(y: int, par: int, disc: tuple[int, int] | None, depth: int) -> None:
        nonlocal cnt
        cnt += 1
        ov.st[y] = cnt
        ov.depth[y] = depth
        ov.parent[y] = par
        if disc is not None:
            ov.disc[y] = disc
        recolor(y, GRAY)
        if y not in explicit:
            i = occ_of(y)[0].mini_piece
            ov.mini_entry[y] = active_run(i).entry
            record(i, y, cnt)
            touch(i, cnt)

    def handle(i: int, j: int, pair: EntryExitPair, fresh: bool) -> int:
        """Account for the block just produced in (i, j); return the next current vertex."""
        nonlocal cnt
        e = cat.entry(index[i][j])
        pidx = len(e.pairs) - 1
        block = e.block(pidx)
        gl = labels(i, j)
        ov.block_start[(i, j, pidx)] = cnt + 1
        if block:
            if fresh:
                first = gl[block[0] - 1]
                ov.block_first[(i, j, pair.entry)] = first
                record(i, first, cnt + 1)
            touch(i, cnt + len(block))
            cnt += len(block)
        entry_g = gl[pair.entry - 1]
        if pair.is_null:
            return entry_g
        x = pair.exit
        y = gl[x - 1]
        par = gl[e.parent(x) - 1]
        base = ov.depth[entry_g]
        if y in explicit:
            close_segment(i, mstack[i][-1], y)
            mstack[i][-1].paused_at = y
        visit(y, par, (i, j), base + e.run_depth(x))
        return y

    def enter(v: int, mc: MicroLabel) -> int:
        i, j = mc.mini_piece, mc.micro_piece
        if v in explicit and cur_mini.get(v) != i:
            leave_mini(v)
            run = _MiniRun(v)
            mstack[i].append(run)
            cur_mini[v] = i
            open_segment(i, run, 0)
        res = cat.advance_dfs(index[i][j], ("enter", mc.label))
        ov.advances += 1
        index[i][j] = res.index
        return handle(i, j, res.pair, True)

    def leave_mini(v: int) -> None:
        i = cur_mini.pop(v, None)
        if i is None:
            return
        run = mstack[i].pop()
        if run.entry != v or run.paused_at:
            raise DfsConsistencyError(f"mini run nesting broken at {v}")
        close_segment(i, run, 0)

    def finish(v: int) -> None:
        lp = ov.st[v]
        anchor: tuple[str, int] = ("st", v)
        for k, mc in enumerate(occ_of(v)):
            i, j = mc.mini_piece, mc.micro_piece
            e = cat.entry(index[i][j])
            gl = labels(i, j)
            if e.children(mc.label):
                ov.child_pieces.setdefault(v, []).append(k)
            targets, exits = e.run_summary(mc.label)
            for t in targets:
                tg = gl[t - 1]
                if e.is_augmented(t):
                    val = ov.st[tg]
                else:
                    val = ov.block_start[(i, j, e.sim.block_of[t])] + e.sim.block_pos[t]
                if val < lp:
                    lp, anchor = val, ("st", tg)
            for x in exits:
                xg = gl[x - 1]
                val = ov.lp[xg]
                if val < lp:
                    lp = val
                    anchor = ("lp", xg) if xg in explicit else ov.lp_anchor[xg]
        ov.lp[v] = lp
        ov.nd[v] = cnt - ov.st[v] + 1
        if v in explicit:
            leave_mini(v)
        else:
            ov.lp_anchor[v] = anchor
            i = occ_of(v)[0].mini_piece
            ov.end_anchor[v] = active_run(i).last
        recolor(v, BLACK)

    itpos: dict[int, int] = {}
    visit(start, 0, None, 0)
    cur = start
    while cur:
        v = cur
        o = occ_of(v)
        k = itpos.get(v, 0)
        if k < len(o):
            itpos[v] = k + 1
            cur = enter(v, o[k])
            continue
        del itpos[v]
        finish(v)
        if v == start:
            break
        i, j = ov.disc[v]
        local = next(mc.label for mc in o if (mc.mini_piece, mc.micro_piece) == (i, j))
        if v in explicit:
            run = mstack[i][-1] if mstack[i] else None
            if run is None or run.paused_at != v:
                raise DfsConsistencyError(f"mini run of piece {i} is not paused at {v}")
            run.paused_at = 0
            run.last = ("end", v)
            open_segment(i, run, v)
        res = cat.advance_dfs(index[i][j], ("backtrack", local))
        ov.advances += 1
        index[i][j] = res.index
        cur = handle(i, j, res.pair, False)
    ov.visited = cnt
    if cnt != g.n:
        raise DfsConsistencyError(f"traversal reached {cnt} of {g.n} vertices (disconnected input?)")
    enc.overlay = ov
    log.debug("dfs from %d: %d advances, %d colour swaps", start, ov.advances, ov.color_swaps)
    return ov


# -- palm tree queries -----------------------------------------------------------


def _require(enc: Encoding) -> Overlay:
    if enc.overlay is None:
        raise DfsStateError("no DFS has been run on this encoding")
    return enc.overlay


def _home(enc: Encoding, u: int) -> MicroLabel:
    occ = enc.occurrences(u)
    return occ[0]


def is_augmented(enc: Encoding, u: int) -> bool:
    ov = _require(enc)
    return u in ov.explicit or len(enc.occurrences(u)) > 1 or _augmented_in_piece(enc, u)


def _augmented_in_piece(enc: Encoding, u: int) -> bool:
    mc = _home(enc, u)
    return enc.catalog.entry(enc.micro_index[mc.mini_piece][mc.micro_piece]).is_augmented(mc.label)


def parent(enc: Encoding, u: int) -> int | None:
    ov = _require(enc)
    enc._check_vertex(u)
    if u == ov.root:
        return None
    if u in ov.explicit:
        return ov.parent[u]
    mc = _home(enc, u)
    i, j = mc.mini_piece, mc.micro_piece
    e = enc.catalog.entry(enc.micro_index[i][j])
    if e.is_augmented(mc.label):
        # micro-boundary vertex: its parent lies in the piece that discovered it
        di, dj = ov.disc[u]
        for oc in ov.occ[u]:
            if (oc.mini_piece, oc.micro_piece) == (di, dj):
                de = enc.catalog.entry(enc.micro_index[di][dj])
                return enc.micro_graph_label(di, dj, de.parent(oc.label))
    return enc.micro_graph_label(i, j, e.parent(mc.label))


def children_iter(enc: Encoding, u: int) -> Iterator[int]:
    """Tree children of u in ascending preorder."""
    _require(enc)
    enc._check_vertex(u)
    ov = enc.overlay
    occ = enc.occurrences(u)
    if len(occ) == 1 and not _augmented_in_piece(enc, u):
        pieces = occ
    else:
        pieces = [occ[k] for k in ov.child_pieces.get(u, ())]
    for mc in pieces:
        i, j = mc.mini_piece, mc.micro_piece
        e = enc.catalog.entry(enc.micro_index[i][j])
        gl = enc.micro_locals_to_graph(i, j)
        for c in e.children(mc.label):
            yield gl[c - 1]


def _back(enc: Encoding, u: int, inward: bool) -> Iterator[int]:
    _require(enc)
    for mc in enc.occurrences(u):
        i, j = mc.mini_piece, mc.micro_piece
        e = enc.catalog.entry(enc.micro_index[i][j])
        gl = enc.micro_locals_to_graph(i, j)
        for w in (e.back_edges_in(mc.label) if inward else e.back_edges_out(mc.label)):
            yield gl[w - 1]


def back_edges_out(enc: Encoding, u: int) -> Iterator[int]:
    """All v with a back edge (u, v), i.e. v a proper ancestor of u."""
    return _back(enc, u, False)


def back_edges_in(enc: Encoding, u: int) -> Iterator[int]:
    return _back(enc, u, True)


def entry_exit_log(enc: Encoding, piece: int | tuple[int, int], level: str = "micro") -> list[EntryExitPair]:
    """Entry-exit pairs of a piece in graph labels, in creation order (exit 0 = null)."""
    ov = _require(enc)
    if level == "mini":
        if not isinstance(piece, int) or not 0 <= piece < enc.mini_count():
            raise VertexRangeError(f"unknown mini piece {piece!r}")
        return list(ov.mini_pairs[piece])
    if level != "micro":
        raise ValueError(f"unknown level {level!r}")
    try:
        i, j = piece  # type: ignore[misc]
    except (TypeError, ValueError):
        raise VertexRangeError(f"micro piece must be (mini, micro), got {piece!r}") from None
    if not 0 <= i < enc.mini_count() or not 0 <= j < enc.micro_count(i):
        raise VertexRangeError(f"unknown micro piece {piece!r}")
    e = enc.catalog.entry(enc.micro_index[i][j])
    gl = enc.micro_locals_to_graph(i, j)
    return [EntryExitPair(gl[p.entry - 1], gl[p.exit - 1] if p.exit else 0) for p in e.pairs]


def augmented_count(enc: Encoding, piece: int | tuple[int, int], level: str = "micro") -> int:
    """Boundary-or-root vertices of a piece (the bound's k)."""
    ov = _require(enc)
    if level == "mini":
        return sum(1 for u in enc.minis[piece].vertices if u in ov.explicit)
    i, j = piece  # type: ignore[misc]
    return len(enc.catalog.entry(enc.micro_index[i][j]).key.augmented)


def preorder(enc: Encoding) -> list[int]:
    """Vertices in DFS preorder, recovered by walking children iterators."""
    ov = _require(enc)
    out = []
    stack = [iter([ov.root])]
    while stack:
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            continue
        out.append(nxt)
        stack.append(children_iter(enc, nxt))
    return out


def tree_edges(enc: Encoding) -> list[tuple[int, int]]:
    _require(enc)
    return sorted((parent(enc, v), v) for v in enc.graph.vertices() if v != enc.overlay.root)


def back_edges(enc: Encoding) -> list[tuple[int, int]]:
    _require(enc)
    return sorted((u, w) for u in enc.graph.vertices() for w in back_edges_out(enc, u))
