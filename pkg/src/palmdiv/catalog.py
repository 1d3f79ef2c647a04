"""Memoized lookup table of augmented micro pieces.

A micro piece is stored as an index into the catalog. The key of an entry is
the piece's canonical labeled graph plus its partial augmentation: which local
vertices are augmented (boundary vertices and the DFS root), and an ordered
event log over those vertices (colour changes and entry-exit pairs). Every
derived table of an entry, including the colours and DFS parents of the
non-augmented vertices, is recomputed from the key by replaying the log, so
two equal keys always describe the same state. Updating a piece means
swapping its index for the index of the successor key.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

WHITE, GRAY, BLACK = 0, 1, 2
COLOR_NAMES = {"white": WHITE, "gray": GRAY, "black": BLACK}

# event tags inside the log
EV_GRAY, EV_BLACK, EV_PAIR = 1, 2, 3

NULL_EXIT = 0


class CatalogError(Exception):
    pass


class StateError(CatalogError):
    pass


class PieceSizeError(CatalogError):
    pass


class EntryExitPair(NamedTuple):
    entry: int
    exit: int  # NULL_EXIT (0) for the null exit

    @property
    def is_null(self) -> bool:
        return self.exit == NULL_EXIT


class LocalGraph:
    """Adjacency of a piece on local labels 1..k (index 0 unused)."""

    __slots__ = ("k", "adj", "code")

    def __init__(self, k: int, adj: Sequence[Sequence[int]]):
        self.k = k
        self.adj = tuple(tuple(a) for a in adj)
        self.code = encode_local_graph(k, self.adj)

    @classmethod
    def from_edges(cls, k: int, edges: Iterable[tuple[int, int]]) -> "LocalGraph":
        sets: list[set[int]] = [set() for _ in range(k + 1)]
        for u, v in edges:
            sets[u].add(v)
            sets[v].add(u)
        return cls(k, [sorted(s) for s in sets])

    def edge_count(self) -> int:
        return sum(len(a) for a in self.adj) // 2


def encode_local_graph(k: int, adj: Sequence[Sequence[int]]) -> bytes:
    """Sorted adjacency serialization: k, then per vertex its higher neighbours."""
    out = [struct.pack("<H", k)]
    for u in range(1, k + 1):
        up = [v for v in adj[u] if v > u]
        out.append(struct.pack(f"<H{len(up)}H", len(up), *up))
    return b"".join(out)


def decode_local_graph(code: bytes) -> LocalGraph:
    (k,) = struct.unpack_from("<H", code, 0)
    off = 2
    edges = []
    for u in range(1, k + 1):
        (c,) = struct.unpack_from("<H", code, off)
        off += 2
        for v in struct.unpack_from(f"<{c}H", code, off):
            edges.append((u, v))
        off += 2 * c
    return LocalGraph.from_edges(k, edges)


@dataclass(frozen=True)
class CatalogKey:
    graph: bytes
    augmented: tuple[int, ...]  # sorted local labels
    root: int = 0  # local label of the DFS root if it lies in this piece
    events: tuple[tuple[int, ...], ...] = ()
    order: tuple[tuple[int, int, int], ...] = ()  # (exit, carrier, rank) sorted by lowpoint

    def with_events(self, *events: tuple[int, ...]) -> "CatalogKey":
        return CatalogKey(self.graph, self.augmented, self.root, self.events + events, self.order)

    def with_order(self, order: tuple[tuple[int, int, int], ...]) -> "CatalogKey":
        return CatalogKey(self.graph, self.augmented, self.root, self.events, order)

    def aug_width(self) -> int:
        """Bits of one partial vertex augmentation: colour plus a local label."""
        k = struct.unpack_from("<H", self.graph, 0)[0]
        return 2 + max(1, k.bit_length())

    def graph_aug_bits(self) -> int:
        k = struct.unpack_from("<H", self.graph, 0)[0]
        lw = max(1, k.bit_length())
        bits = 0
        for ev in self.events:
            bits += 2 + lw * (len(ev) - 1)
        bits += len(self.order) * 3 * lw
        return bits


class _Run:
    __slots__ = ("entry", "stack", "paused_at", "done", "last", "pairs")

    def __init__(self, entry: int):
        self.entry = entry
        self.stack: list[list[int]] = [[entry, 0]]
        self.paused_at = 0
        self.done = False
        self.last: tuple[str, int] = ("v", entry)
        self.pairs: list[int] = []

    def clone(self) -> "_Run":
        r = _Run.__new__(_Run)
        r.entry = self.entry
        r.stack = [list(x) for x in self.stack]
        r.paused_at = self.paused_at
        r.done = self.done
        r.last = self.last
        r.pairs = list(self.pairs)
        return r


class _Sim:
    """Piece-local DFS state driven by an event log."""

    def __init__(self, g: LocalGraph, augmented: Iterable[int]):
        k = g.k
        self.g = g
        self.aug = frozenset(augmented)
        self.color = [WHITE] * (k + 1)
        self.parent = [0] * (k + 1)
        self.children: list[list[int]] = [[] for _ in range(k + 1)]
        self.back_out: list[list[int]] = [[] for _ in range(k + 1)]
        self.back_in: list[list[int]] = [[] for _ in range(k + 1)]
        self.run_of = [0] * (k + 1)
        self.rdepth = [0] * (k + 1)
        self.block_of = [-1] * (k + 1)
        self.block_pos = [0] * (k + 1)
        self.end_anchor: list[tuple[str, int] | None] = [None] * (k + 1)
        self.runs: dict[int, _Run] = {}
        self.pairs: list[EntryExitPair] = []
        self.blocks: list[list[int]] = []
        self.st_order: list[int] = []
        self.color_events = 0

    def clone(self) -> "_Sim":
        s = _Sim.__new__(_Sim)
        s.g = self.g
        s.aug = self.aug
        s.color = list(self.color)
        s.parent = list(self.parent)
        s.children = [list(x) for x in self.children]
        s.back_out = [list(x) for x in self.back_out]
        s.back_in = [list(x) for x in self.back_in]
        s.run_of = list(self.run_of)
        s.rdepth = list(self.rdepth)
        s.block_of = list(self.block_of)
        s.block_pos = list(self.block_pos)
        s.end_anchor = list(self.end_anchor)
        s.runs = {e: r.clone() for e, r in self.runs.items()}
        s.pairs = list(self.pairs)
        s.blocks = [list(b) for b in self.blocks]
        s.st_order = list(self.st_order)
        s.color_events = self.color_events
        return s

    # -- events ---------------------------------------------------------------

    def set_color(self, v: int, c: int) -> None:
        if v not in self.aug:
            raise StateError(f"vertex {v} is not augmented")
        old = self.color[v]
        if c < old or c > old + 1:
            raise StateError(f"illegal colour transition {old}->{c} at vertex {v}")
        if c == old:
            return
        self.color[v] = c
        self.color_events += 1
        if c == GRAY:
            self.st_order.append(v)

    def enter(self, v: int) -> EntryExitPair:
        if v not in self.aug:
            raise StateError(f"entry {v} is not augmented")
        if self.color[v] != GRAY:
            raise StateError(f"entry {v} must be gray")
        if v in self.runs:
            raise StateError(f"vertex {v} already entered this piece")
        run = _Run(v)
        self.runs[v] = run
        return self._advance(run)

    def backtrack(self, x: int) -> EntryExitPair:
        if x not in self.aug or self.color[x] != BLACK:
            raise StateError(f"backtrack target {x} must be a finished augmented vertex")
        for run in self.runs.values():
            if run.paused_at == x:
                run.paused_at = 0
                run.last = ("end", x)
                return self._advance(run)
        raise StateError(f"no run of this piece is paused at {x}")

    def _advance(self, run: _Run) -> EntryExitPair:
        adj = self.g.adj
        color, parent, aug = self.color, self.parent, self.aug
        entry = run.entry
        pidx = len(self.pairs)
        block: list[int] = []
        stack = run.stack
        while stack:
            top = stack[-1]
            v = top[0]
            nb = adj[v]
            if top[1] < len(nb):
                w = nb[top[1]]
                top[1] += 1
                if w == parent[v]:
                    continue
                c = color[w]
                if c == WHITE:
                    parent[w] = v
                    self.children[v].append(w)
                    self.run_of[w] = entry
                    self.rdepth[w] = (0 if v == entry else self.rdepth[v]) + 1
                    if w in aug:
                        run.paused_at = w
                        return self._close(run, pidx, block, w)
                    color[w] = GRAY
                    self.block_of[w] = pidx
                    self.block_pos[w] = len(block)
                    block.append(w)
                    self.st_order.append(w)
                    run.last = ("v", w)
                    stack.append([w, 0])
                elif c == GRAY:
                    self.back_out[v].append(w)
                    self.back_in[w].append(v)
            else:
                stack.pop()
                if v != entry:
                    color[v] = BLACK
                    self.end_anchor[v] = run.last
        run.done = True
        return self._close(run, pidx, block, NULL_EXIT)

    def _close(self, run: _Run, pidx: int, block: list[int], exit_: int) -> EntryExitPair:
        pair = EntryExitPair(run.entry, exit_)
        self.pairs.append(pair)
        self.blocks.append(block)
        run.pairs.append(pidx)
        return pair

    def apply(self, ev: tuple[int, ...]) -> EntryExitPair | None:
        tag = ev[0]
        if tag == EV_GRAY:
            self.set_color(ev[1], GRAY)
        elif tag == EV_BLACK:
            self.set_color(ev[1], BLACK)
        elif tag == EV_PAIR:
            entry, exit_ = ev[1], ev[2]
            run = self.runs.get(entry)
            pair = self.enter(entry) if run is None else self._resume_for_replay(run)
            if pair.exit != exit_:
                raise CatalogError(f"event log inconsistent: replay exit {pair.exit} != {exit_}")
            return pair
        else:
            raise CatalogError(f"unknown event tag {tag}")
        return None

    def _resume_for_replay(self, run: _Run) -> EntryExitPair:
        if not run.paused_at:
            raise CatalogError(f"event log resumes run {run.entry} which is not paused")
        return self.backtrack(run.paused_at)


class CatalogEntry:
    """One catalog slot: key plus tables derived from it."""

    def __init__(self, key: CatalogKey, graph: LocalGraph, sim: _Sim | None = None):
        self.key = key
        self.graph = graph
        if sim is None:
            sim = _Sim(graph, key.augmented)
            for ev in key.events:
                sim.apply(ev)
        self.sim = sim
        self._st_index: dict[int, int] | None = None
        self._lowpoints: dict[int, tuple[int, str]] | None = None
        self._forest_depth: list[int] | None = None

    # -- basic tables ---------------------------------------------------------

    @property
    def k(self) -> int:
        return self.graph.k

    @property
    def pairs(self) -> list[EntryExitPair]:
        return self.sim.pairs

    def colors(self) -> tuple[int, ...]:
        return tuple(self.sim.color[v] for v in self.key.augmented)

    def color(self, v: int) -> int:
        self._check(v)
        return self.sim.color[v]

    def is_augmented(self, v: int) -> bool:
        return v in self.sim.aug

    def _check(self, v: int) -> None:
        if not 1 <= v <= self.graph.k:
            raise IndexError(f"local label {v} outside 1..{self.graph.k}")

    def block(self, pair_index: int) -> list[int]:
        return self.sim.blocks[pair_index]

    def parent(self, v: int) -> int:
        """Local tree parent if the tree edge into v lies in this piece, else 0."""
        self._check(v)
        return self.sim.parent[v]

    def children(self, v: int) -> list[int]:
        self._check(v)
        return self.sim.children[v]

    def back_edges_out(self, v: int) -> list[int]:
        self._check(v)
        return self.sim.back_out[v]

    def back_edges_in(self, v: int) -> list[int]:
        self._check(v)
        return self.sim.back_in[v]

    def run_entry(self, v: int) -> int:
        """Entry of the run that visited (or, for an exit, discovered) v; 0 if none."""
        self._check(v)
        return self.sim.run_of[v]

    def run_depth(self, v: int) -> int:
        self._check(v)
        return self.sim.rdepth[v]

    def run_of_entry(self, entry: int) -> _Run | None:
        return self.sim.runs.get(entry)

    def query(self, q: str, *args: int):
        """Precomputed piece query by name (degree, adjacent, neighbors, children,
        back_edges, back_edges_in, parent)."""
        if q == "degree":
            self._check(args[0])
            return len(self.graph.adj[args[0]])
        if q == "adjacent":
            self._check(args[0])
            self._check(args[1])
            return args[1] in self.graph.adj[args[0]]
        if q == "neighbors":
            self._check(args[0])
            return list(self.graph.adj[args[0]])
        v = args[0]
        self._check(v)
        if q in ("children", "back_edges", "back_edges_in", "parent") and (
            v not in self.sim.aug and self.sim.color[v] != BLACK
        ):
            raise StateError(f"vertex {v} has not been finished by the piece-local DFS")
        if q == "children":
            return list(self.sim.children[v])
        if q == "back_edges":
            return list(self.sim.back_out[v])
        if q == "back_edges_in":
            return list(self.sim.back_in[v])
        if q == "parent":
            return self.sim.parent[v]
        raise ValueError(f"unknown piece query {q!r}")

    # -- strongly local values -------------------------------------------------

    def local_offset(self, v: int) -> tuple[int, int, str]:
        """(reference, offset, kind) locating v's preorder number.

        kind 'self': v is augmented, offset 0.
        kind 'exit': st(v) = st(reference) + offset, offset < 0.
        kind 'after': st(v) = st(reference) + nd(reference) + offset, reference
            being the exit whose subtree was finished just before v's block.
        kind 'entry': st(v) = st(reference) + gap + offset, where gap is the
            number of vertices visited between the entry and its first block.
        """
        self._check(v)
        sim = self.sim
        if v in sim.aug:
            return v, 0, "self"
        p = sim.block_of[v]
        if p < 0:
            raise StateError(f"vertex {v} has not been visited by the piece-local DFS")
        pos = sim.block_pos[v]
        pair = sim.pairs[p]
        if pair.exit != NULL_EXIT:
            return pair.exit, pos - len(sim.blocks[p]), "exit"
        run = sim.runs[pair.entry]
        i = run.pairs.index(p)
        if i > 0:
            prev = sim.pairs[run.pairs[i - 1]]
            return prev.exit, pos, "after"
        return pair.entry, pos + 1, "entry"

    def end_anchor(self, v: int) -> tuple[str, int]:
        """('v', w): the last vertex of v's subtree is local vertex w;
        ('end', x): it is the last vertex of exit x's subtree."""
        self._check(v)
        a = self.sim.end_anchor[v]
        if a is None:
            raise StateError(f"vertex {v} has no local subtree end")
        return a

    def st_index(self, v: int) -> int:
        """Position of v among this piece's vertices in global preorder."""
        if self._st_index is None:
            self._st_index = {u: i for i, u in enumerate(self.sim.st_order)}
        return self._st_index[v]

    def run_summary(self, entry: int) -> tuple[list[int], list[int]]:
        """(back-edge targets, exits) of the run started at ``entry``."""
        run = self.sim.runs.get(entry)
        if run is None:
            raise StateError(f"no run for entry {entry}")
        sim = self.sim
        members = [entry]
        for p in run.pairs:
            members.extend(sim.blocks[p])
        targets: list[int] = []
        exits: list[int] = []
        for u in members:
            targets.extend(sim.back_out[u])
            for c in sim.children[u]:
                if c in sim.aug:
                    exits.append(c)
        return targets, exits

    def local_lowpoint(self, v: int) -> tuple[int, str]:
        """(anchor, kind): kind 'st' means lp(v) = st(anchor) for a local vertex;
        kind 'lp' means lp(v) = lp(anchor) for an augmented exit below v."""
        self._check(v)
        if self._lowpoints is None:
            self._lowpoints = self._compute_lowpoints()
        if v not in self._lowpoints:
            raise StateError(f"no lowpoint anchor for vertex {v}")
        return self._lowpoints[v]

    def _compute_lowpoints(self) -> dict[int, tuple[int, str]]:
        sim = self.sim
        order = self.key.order
        if not order and any(c in sim.aug for u in range(1, self.k + 1) for c in sim.children[u] if u not in sim.aug):
            raise StateError("lowpoint order augmentation missing")
        lp_key: dict[int, tuple[float, int, int, str]] = {}
        for rank_pos, (x, carrier, rank) in enumerate(order):
            if carrier:
                lp_key[x] = (self.st_index(carrier), 0, carrier, "st")
            else:
                lp_key[x] = (rank - 0.5, rank_pos, x, "lp")
        result: dict[int, tuple[int, str]] = {}
        best: dict[int, tuple[float, int, int, str]] = {}

        def st_key(u: int) -> tuple[float, int, int, str]:
            return (self.st_index(u), 0, u, "st")

        # children before parents: reverse local preorder of non-augmented vertices
        for u in reversed(sim.st_order):
            if u in sim.aug or sim.color[u] != BLACK:
                continue
            cand = st_key(u)
            for t in sim.back_out[u]:
                tk = st_key(t)
                if tk < cand:
                    cand = tk
            for c in sim.children[u]:
                ck = lp_key.get(c) if c in sim.aug else best.get(c)
                if ck is None:
                    raise StateError(f"missing lowpoint of child {c}")
                if ck < cand:
                    cand = ck
            best[u] = cand
            result[u] = (cand[2], cand[3])
        return result

    def forest_depth(self, v: int) -> int:
        if self._forest_depth is None:
            depth = [0] * (self.k + 1)
            for u in self.sim.st_order:
                p = self.sim.parent[u]
                depth[u] = depth[p] + 1 if p else 0
            self._forest_depth = depth
        return self._forest_depth[v]

    def local_lca(self, a: int, b: int) -> int:
        """LCA within the piece-local forest of tree edges; 0 if in different trees."""
        self._check(a)
        self._check(b)
        par = self.sim.parent
        da, db = self.forest_depth(a), self.forest_depth(b)
        while da > db:
            a, da = par[a], da - 1
        while db > da:
            b, db = par[b], db - 1
        while a != b:
            a, b = par[a], par[b]
            if not a or not b:
                return 0
        return a

    def shrunken_tree(self, important: Iterable[int]) -> dict[int, int]:
        """Contract the piece-local forest onto ``important`` plus branch vertices.

        Returns node -> parent (0 for roots). Non-important leaves are removed
        repeatedly and non-important vertices with one child are spliced out.
        """
        imp = set(important)
        for v in imp:
            self._check(v)
        return shrink_forest(self.sim.parent, self.sim.children, self.sim.st_order, imp)


def shrink_forest(
    parent: Sequence[int] | dict[int, int],
    children: Sequence[Sequence[int]] | dict[int, Sequence[int]],
    order: Sequence[int],
    important: set[int],
) -> dict[int, int]:
    """Shrink a forest given in preorder ``order`` onto ``important`` vertices.

    A vertex survives if it is important or at least two of its child
    subtrees hold important vertices. Returns survivor -> nearest surviving
    proper ancestor (0 for none).
    """
    has: dict[int, bool] = {}
    branch: dict[int, int] = {}
    for u in reversed(order):
        cnt = sum(1 for c in children[u] if has.get(c))
        has[u] = u in important or cnt > 0
        branch[u] = cnt
    out: dict[int, int] = {}
    nearest: dict[int, int] = {}
    for u in order:
        if not has[u]:
            continue
        p = parent[u]
        up = nearest.get(p, 0) if p else 0
        if u in important or branch[u] >= 2:
            out[u] = up
            nearest[u] = u
        else:
            nearest[u] = up
    return out


class AdvanceResult(NamedTuple):
    index: int
    pair: EntryExitPair


class Catalog:
    """Interning store of catalog entries with memoized transitions."""

    def __init__(self, max_piece: int | None = None):
        self.max_piece = max_piece
        self.entries: list[CatalogEntry] = []
        self._index: dict[CatalogKey, int] = {}
        self._graphs: dict[bytes, LocalGraph] = {}
        self._transitions: dict[tuple[int, tuple], int] = {}
        self.hits = 0
        self.misses = 0
        self.color_swaps = 0
        self.advances = 0

    def __len__(self) -> int:
        return len(self.entries)

    def graph_of(self, code: bytes) -> LocalGraph:
        g = self._graphs.get(code)
        if g is None:
            g = decode_local_graph(code)
            self._graphs[code] = g
        return g

    def intern(self, key: CatalogKey, _sim: _Sim | None = None) -> int:
        idx = self._index.get(key)
        if idx is not None:
            self.hits += 1
            return idx
        g = self.graph_of(key.graph)
        if self.max_piece is not None and g.k > self.max_piece:
            raise PieceSizeError(f"piece of {g.k} vertices exceeds r_tilde={self.max_piece}")
        for v in key.augmented:
            if not 1 <= v <= g.k:
                raise CatalogError(f"augmented vertex {v} outside 1..{g.k}")
        self.misses += 1
        entry = CatalogEntry(key, g, _sim)
        idx = len(self.entries)
        self.entries.append(entry)
        self._index[key] = idx
        return idx

    def entry(self, idx: int) -> CatalogEntry:
        return self.entries[idx]

    def key(self, idx: int) -> CatalogKey:
        return self.entries[idx].key

    def set_color(self, idx: int, v: int, color: int | str) -> int:
        c = COLOR_NAMES[color] if isinstance(color, str) else color
        memo = (idx, ("c", v, c))
        hit = self._transitions.get(memo)
        if hit is not None:
            if hit != idx:
                self.color_swaps += 1
            return hit
        e = self.entries[idx]
        if v not in e.sim.aug:
            raise StateError(f"vertex {v} is not augmented")
        old = e.sim.color[v]
        if c == old:
            self._transitions[memo] = idx
            return idx
        if c != old + 1:
            raise StateError(f"illegal colour transition {old}->{c} at vertex {v}")
        sim = e.sim.clone()
        sim.set_color(v, c)
        tag = EV_GRAY if c == GRAY else EV_BLACK
        new = self.intern(e.key.with_events((tag, v)), sim)
        self._transitions[memo] = new
        self.color_swaps += 1
        return new

    def advance_dfs(self, idx: int, event: tuple[str, int]) -> AdvanceResult:
        """Run the piece-local DFS for ``('enter', v)`` or ``('backtrack', x)``.

        Returns the successor index and the entry-exit pair produced.
        """
        kind, v = event
        if kind not in ("enter", "backtrack"):
            raise ValueError(f"unknown event {kind!r}")
        self.advances += 1
        memo = (idx, (kind, v))
        hit = self._transitions.get(memo)
        if hit is not None:
            return AdvanceResult(hit, self.entries[hit].pairs[-1])
        e = self.entries[idx]
        sim = e.sim.clone()
        pair = sim.enter(v) if kind == "enter" else sim.backtrack(v)
        new = self.intern(e.key.with_events((EV_PAIR, pair.entry, pair.exit)), sim)
        self._transitions[memo] = new
        return AdvanceResult(new, pair)

    def with_order(self, idx: int, order: tuple[tuple[int, int, int], ...]) -> int:
        e = self.entries[idx]
        if e.key.order == order:
            return idx
        return self.intern(e.key.with_order(order), e.sim)

    def stats(self) -> dict[str, int | float]:
        table_bytes = 0
        for e in self.entries:
            k = e.k
            table_bytes += len(e.key.graph) + 4 * k + 4 * (2 * e.graph.edge_count()) + 8 * len(e.pairs)
        lookups = self.hits + self.misses
        return {
            "entries": len(self.entries),
            "table_bytes": table_bytes,
            "hit_rate": (self.hits / lookups) if lookups else 0.0,
            "color_swaps": self.color_swaps,
            "advances": self.advances,
        }
