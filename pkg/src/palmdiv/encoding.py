"""Nested division encoding: translation between graph, mini and micro labels,
level graph queries, and bit accounting.

Local labels inside a piece are assigned by ascending label of the level above,
so ascending mini label order equals ascending graph label order.
"""
from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Union

from .catalog import Catalog, CatalogKey, LocalGraph
from .division import NestedDivision, nested_division, default_params
from .fid import Fid
from .graph import Graph, VertexRangeError


class LabelError(VertexRangeError):
    pass


class MiniLabel(NamedTuple):
    piece: int
    label: int


class MicroLabel(NamedTuple):
    mini_piece: int
    micro_piece: int
    label: int


Label = Union[int, MiniLabel, MicroLabel]


def _bits(x: int) -> int:
    return max(1, int(x).bit_length())


@dataclass
class _MiniLevel:
    """Micro-level translation data of one mini piece."""

    vertices: tuple[int, ...]  # graph labels, ascending; mini label = position + 1
    micro_vertices: list[tuple[int, ...]]  # per micro piece: mini labels ascending
    micro_fid: Fid  # marks micro-boundary mini labels
    home_micro: list[int]  # mini label -> micro piece id (-1 for micro-boundary)
    micro_xref: list[tuple[tuple[int, int], ...]]  # by micro-boundary rank: (j, u_ij)


class Encoding:
    """Graph plus nested division, queried through translation mappings."""

    def __init__(self, graph: Graph, division: NestedDivision, catalog: Catalog | None = None):
        self.graph = graph
        self.division = division
        self.r = division.r
        self.r_tilde = division.r_tilde
        self.catalog = catalog if catalog is not None else Catalog(max_piece=division.r_tilde)
        n = graph.n
        mini = division.mini

        boundary = sorted(mini.boundary)
        self.boundary_fid = Fid.from_positions(n, boundary)
        self.home_mini = [-1] * (n + 1)
        self.mini_xref: list[tuple[tuple[int, int], ...]] = []
        self.minis: list[_MiniLevel] = []

        for p in mini.pieces:
            for u in p.vertices:
                if u not in mini.boundary:
                    self.home_mini[u] = p.id
        for u in boundary:
            occ = []
            for i in mini.occurrences[u]:
                occ.append((i, bisect_left(mini.pieces[i].vertices, u) + 1))
            self.mini_xref.append(tuple(sorted(occ)))

        for p, sub in zip(mini.pieces, division.micro):
            verts = p.vertices
            local = {u: k for k, u in enumerate(verts, start=1)}
            mvs = [tuple(local[u] for u in q.vertices) for q in sub.pieces]
            mb = sorted(local[u] for u in sub.boundary)
            home = [-1] * (len(verts) + 1)
            for q in sub.pieces:
                for u in q.vertices:
                    if u not in sub.boundary:
                        home[local[u]] = q.id
            xref = []
            for ul in mb:
                occ = []
                for j in sub.occurrences[verts[ul - 1]]:
                    occ.append((j, bisect_left(mvs[j], ul) + 1))
                xref.append(tuple(sorted(occ)))
            self.minis.append(
                _MiniLevel(verts, mvs, Fid.from_positions(len(verts), mb), home, xref)
            )

        self.initial_index: list[list[int]] = []
        for i, sub in enumerate(division.micro):
            row = []
            for q in sub.pieces:
                row.append(self.catalog.intern(self.base_key(i, q.id)))
            self.initial_index.append(row)
        self.micro_index: list[list[int]] = [list(row) for row in self.initial_index]
        self.overlay = None  # set by dfs
        self.meta = None  # set by preprocess_meta

    # -- construction helpers ------------------------------------------------

    def local_graph(self, i: int, j: int) -> LocalGraph:
        sub = self.division.micro[i].pieces[j]
        verts = sub.vertices
        pos = {u: k for k, u in enumerate(verts, start=1)}
        return LocalGraph.from_edges(len(verts), [(pos[a], pos[b]) for a, b in sub.edges])

    def augmented_locals(self, i: int, j: int, root: int = 0) -> tuple[int, ...]:
        """Local labels in micro piece (i, j) that are micro-boundary, mini-boundary or the root."""
        lvl = self.minis[i]
        out = []
        for k, ul in enumerate(lvl.micro_vertices[j], start=1):
            u = lvl.vertices[ul - 1]
            if lvl.micro_fid.access(ul) or self.boundary_fid.access(u) or u == root:
                out.append(k)
        return tuple(out)

    def base_key(self, i: int, j: int, root: int = 0) -> CatalogKey:
        gl = self.micro_locals_to_graph(i, j)
        root_local = gl.index(root) + 1 if root in gl else 0
        return CatalogKey(self.local_graph(i, j).code, self.augmented_locals(i, j, root), root_local)

    # -- sizes ---------------------------------------------------------------

    @property
    def n(self) -> int:
        return self.graph.n

    def mini_count(self) -> int:
        return len(self.minis)

    def micro_count(self, i: int | None = None) -> int:
        if i is None:
            return sum(len(m.micro_vertices) for m in self.minis)
        self._check_mini_piece(i)
        return len(self.minis[i].micro_vertices)

    def is_mini_boundary(self, u: int) -> bool:
        self._check_vertex(u)
        return bool(self.boundary_fid.access(u))

    def is_micro_boundary(self, ml: MiniLabel) -> bool:
        self._check_mini(ml)
        return bool(self.minis[ml.piece].micro_fid.access(ml.label))

    # -- validation ------------------------------------------------------------

    def _check_vertex(self, u: int) -> None:
        if not (isinstance(u, int) and 1 <= u <= self.graph.n):
            raise VertexRangeError(f"vertex {u!r} not in 1..{self.graph.n}")

    def _check_mini_piece(self, i: int) -> None:
        if not 0 <= i < len(self.minis):
            raise LabelError(f"mini piece {i} not in 0..{len(self.minis) - 1}")

    def _check_mini(self, ml: MiniLabel) -> None:
        self._check_mini_piece(ml.piece)
        if not 1 <= ml.label <= len(self.minis[ml.piece].vertices):
            raise LabelError(f"mini label {ml} out of range")

    def _check_micro(self, mc: MicroLabel) -> None:
        self._check_mini_piece(mc.mini_piece)
        mvs = self.minis[mc.mini_piece].micro_vertices
        if not 0 <= mc.micro_piece < len(mvs):
            raise LabelError(f"micro piece {mc.micro_piece} not in mini piece {mc.mini_piece}")
        if not 1 <= mc.label <= len(mvs[mc.micro_piece]):
            raise LabelError(f"micro label {mc} out of range")

    # -- translation -----------------------------------------------------------

    def to_mini(self, u: int) -> list[MiniLabel]:
        self._check_vertex(u)
        if self.boundary_fid.access(u):
            return [MiniLabel(i, ul) for i, ul in self.mini_xref[self.boundary_fid.rank1(u) - 1]]
        i = self.home_mini[u]
        return [MiniLabel(i, bisect_left(self.minis[i].vertices, u) + 1)]

    def to_micro(self, ml: MiniLabel) -> list[MicroLabel]:
        self._check_mini(ml)
        lvl = self.minis[ml.piece]
        if lvl.micro_fid.access(ml.label):
            occ = lvl.micro_xref[lvl.micro_fid.rank1(ml.label) - 1]
            return [MicroLabel(ml.piece, j, uj) for j, uj in occ]
        j = lvl.home_micro[ml.label]
        return [MicroLabel(ml.piece, j, bisect_left(lvl.micro_vertices[j], ml.label) + 1)]

    def micro_to_mini(self, mc: MicroLabel) -> MiniLabel:
        self._check_micro(mc)
        return MiniLabel(mc.mini_piece, self.minis[mc.mini_piece].micro_vertices[mc.micro_piece][mc.label - 1])

    def to_graph(self, label: MiniLabel | MicroLabel) -> int:
        if isinstance(label, MicroLabel):
            label = self.micro_to_mini(label)
        self._check_mini(label)
        return self.minis[label.piece].vertices[label.label - 1]

    def occurrences(self, u: int) -> list[MicroLabel]:
        """All micro occurrences of graph vertex u, ascending (mini piece, micro piece)."""
        return [mc for ml in self.to_mini(u) for mc in self.to_micro(ml)]

    def micro_graph_label(self, i: int, j: int, local: int) -> int:
        lvl = self.minis[i]
        return lvl.vertices[lvl.micro_vertices[j][local - 1] - 1]

    def micro_locals_to_graph(self, i: int, j: int) -> tuple[int, ...]:
        """Graph labels of micro piece (i, j) indexed by local label - 1."""
        lvl = self.minis[i]
        return tuple(lvl.vertices[ul - 1] for ul in lvl.micro_vertices[j])

    # -- level graph queries ------------------------------------------------------

    def _micro_adj(self, i: int, j: int, local: int) -> tuple[int, ...]:
        return self.catalog.entry(self.micro_index[i][j]).graph.adj[local]

    def level_neighbors(self, v: Label) -> Iterator[Label]:
        """Neighbours on the level of ``v``.

        Graph level: grouped by mini piece, then micro piece, ascending; inside
        a micro piece by ascending local label. This is the effective neighbour
        order followed by the DFS.
        """
        if isinstance(v, MicroLabel):
            self._check_micro(v)
            for w in self._micro_adj(*v):
                yield MicroLabel(v.mini_piece, v.micro_piece, w)
        elif isinstance(v, MiniLabel):
            for mc in self.to_micro(v):
                mvs = self.minis[mc.mini_piece].micro_vertices[mc.micro_piece]
                for w in self._micro_adj(*mc):
                    yield MiniLabel(mc.mini_piece, mvs[w - 1])
        else:
            for mc in self.occurrences(v):
                gl = self.micro_locals_to_graph(mc.mini_piece, mc.micro_piece)
                for w in self._micro_adj(*mc):
                    yield gl[w - 1]

    def level_degree(self, v: Label) -> int:
        if isinstance(v, MicroLabel):
            self._check_micro(v)
            return len(self._micro_adj(*v))
        if isinstance(v, MiniLabel):
            return sum(len(self._micro_adj(*mc)) for mc in self.to_micro(v))
        return sum(len(self._micro_adj(*mc)) for mc in self.occurrences(v))

    def level_adjacent(self, u: Label, v: Label) -> bool:
        if type(u) is not type(v):
            raise LabelError("labels of different levels")
        if isinstance(u, MicroLabel) and (u.mini_piece, u.micro_piece) != (v.mini_piece, v.micro_piece):
            self._check_micro(u)
            self._check_micro(v)
            return False
        if isinstance(u, MiniLabel) and u.piece != v.piece:
            self._check_mini(u)
            self._check_mini(v)
            return False
        if self.level_degree(u) > self.level_degree(v):
            u, v = v, u
        return any(w == v for w in self.level_neighbors(u))

    # -- accounting ----------------------------------------------------------------

    def space_report(self) -> dict[str, int]:
        n = self.graph.n
        fid_bits = 0
        for f in [self.boundary_fid] + [m.micro_fid for m in self.minis]:
            rep = f.space_report()
            fid_bits += rep["payload_bits"] + rep["aux_bits"]
        mini_dupes = sum(len(x) for x in self.mini_xref)
        micro_dupes = sum(len(x) for m in self.minis for x in m.micro_xref)
        pw = _bits(len(self.minis))
        xref_bits = mini_dupes * (pw + _bits(self.r))
        # home piece of every non-boundary vertex; free when there is a single piece
        home_bits = (n - len(self.mini_xref)) * (len(self.minis) - 1).bit_length()
        for m in self.minis:
            qw = _bits(len(m.micro_vertices))
            xref_bits += sum(len(x) for x in m.micro_xref) * (qw + _bits(self.r_tilde))
            home_bits += (len(m.vertices) - len(m.micro_xref)) * (len(m.micro_vertices) - 1).bit_length()
        n_micro = self.micro_count()
        index_bits = n_micro * _bits(max(1, len(self.catalog)))
        entry_bits = 0
        seen = set()
        for row in self.micro_index:
            for idx in row:
                if idx not in seen:
                    seen.add(idx)
                    key = self.catalog.key(idx)
                    entry_bits += 8 * len(key.graph) + len(key.augmented) * key.aug_width() + key.graph_aug_bits()
        rep = {
            "n": n,
            "m": self.graph.m,
            "r": self.r,
            "r_tilde": self.r_tilde,
            "mini_dupes": mini_dupes,
            "micro_dupes": micro_dupes,
            "fid_bits": fid_bits,
            "side_bits": xref_bits,
            "home_bits": home_bits,
            "catalog_index_bits": index_bits,
            "catalog_bits": entry_bits,
        }
        if self.overlay is not None:
            rep["overlay_bits"] = self.overlay.space_bits()
        if self.meta is not None:
            rep["meta_bits"] = self.meta.space_bits()
        return rep


def build_encoding(g: Graph, r: int | None = None, r_tilde: int | None = None) -> Encoding:
    dr, dt = default_params(g.n)
    r = dr if r is None else r
    r_tilde = dt if r_tilde is None else r_tilde
    return Encoding(g, nested_division(g, r, r_tilde))
