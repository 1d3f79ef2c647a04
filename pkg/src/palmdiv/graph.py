"""Undirected simple graphs with dense 1-based labels, edge-list I/O and generators."""
from __future__ import annotations

import io
import math
import random
from bisect import bisect_left
from collections import deque
from typing import Iterable, Iterator

MAX_VERTICES = 2**31 - 1


class GraphError(ValueError):
    pass


class ParseError(GraphError):
    def __init__(self, line_no: int, msg: str):
        super().__init__(f"line {line_no}: {msg}")
        self.line_no = line_no


class VertexRangeError(GraphError, IndexError):
    pass


class Graph:
    """Immutable simple undirected graph on vertices 1..n.

    ``adj[u]`` is a strictly ascending tuple; index 0 is unused.
    """

    __slots__ = ("n", "adj", "m")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise GraphError("vertex count must be non-negative")
        if n > MAX_VERTICES:
            raise GraphError(f"graph too large: n={n}")
        sets: list[set[int]] = [set() for _ in range(n + 1)]
        for u, v in edges:
            if not (1 <= u <= n and 1 <= v <= n):
                raise VertexRangeError(f"edge ({u}, {v}) out of range 1..{n}")
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            sets[u].add(v)
            sets[v].add(u)
        self.n = n
        self.adj: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(s)) for s in sets)
        self.m = sum(len(a) for a in self.adj) // 2

    def neighbors(self, u: int) -> tuple[int, ...]:
        self._check(u)
        return self.adj[u]

    def degree(self, u: int) -> int:
        self._check(u)
        return len(self.adj[u])

    def has_edge(self, u: int, v: int) -> bool:
        self._check(u)
        self._check(v)
        a = self.adj[u]
        i = bisect_left(a, v)
        return i < len(a) and a[i] == v

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges (u, v) with u < v in lexicographic order."""
        for u in range(1, self.n + 1):
            for v in self.adj[u]:
                if v > u:
                    yield u, v

    def vertices(self) -> range:
        return range(1, self.n + 1)

    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        seen = bytearray(self.n + 1)
        seen[1] = 1
        queue = deque([1])
        count = 1
        while queue:
            u = queue.popleft()
            for v in self.adj[u]:
                if not seen[v]:
                    seen[v] = 1
                    count += 1
                    queue.append(v)
        return count == self.n

    def _check(self, u: int) -> None:
        if not (isinstance(u, int) and 1 <= u <= self.n):
            raise VertexRangeError(f"vertex {u!r} not in 1..{self.n}")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.adj == other.adj

    def __hash__(self) -> int:
        return hash((self.n, self.adj))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def neighbors(g: Graph, u: int) -> tuple[int, ...]:
    return g.neighbors(u)


def load_edge_list(source: bytes | str | io.IOBase) -> Graph:
    """Parse ``"n m"`` followed by one ``"u v"`` line per edge.

    Duplicate edges are collapsed; the declared m is not enforced since
    duplicates make it an upper bound. Blank lines and ``#`` comments are skipped.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data

    header: tuple[int, int] | None = None
    edges: list[tuple[int, int]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(line_no, f"expected two integers, got {raw!r}")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(line_no, f"non-integer token in {raw!r}") from None
        if header is None:
            if a < 0 or b < 0:
                raise ParseError(line_no, "negative header value")
            header = (a, b)
            continue
        n = header[0]
        if not (1 <= a <= n and 1 <= b <= n):
            raise VertexRangeError(f"line {line_no}: edge ({a}, {b}) out of range 1..{n}")
        if a == b:
            raise ParseError(line_no, f"self-loop at vertex {a}")
        edges.append((a, b))
    if header is None:
        raise ParseError(1, "missing 'n m' header")
    return Graph(header[0], edges)


def dump_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def remap_sparse(pairs: Iterable[tuple[int, int]]) -> tuple[Graph, dict[int, int]]:
    """Relabel arbitrary integer labels densely (ascending) and build the graph.

    Returns the graph and the mapping original label -> dense label.
    """
    pairs = list(pairs)
    labels = sorted({x for p in pairs for x in p})
    mapping = {x: i for i, x in enumerate(labels, start=1)}
    return Graph(len(labels), [(mapping[u], mapping[v]) for u, v in pairs]), mapping


# -- generators -------------------------------------------------------------


def gen_grid(w: int, h: int) -> Graph:
    """w x h grid; vertex at (row r, col c) is w*(r-1)+c."""
    if w < 1 or h < 1:
        raise GraphError("grid dimensions must be >= 1")
    if w * h > MAX_VERTICES:
        raise GraphError(f"grid {w}x{h} exceeds label width")
    edges = []
    for r in range(h):
        for c in range(w):
            u = r * w + c + 1
            if c + 1 < w:
                edges.append((u, u + 1))
            if r + 1 < h:
                edges.append((u, u + w))
    return Graph(w * h, edges)


def planar_skeleton_dims(n: int) -> tuple[int, int]:
    w = math.isqrt(n - 1) + 1 if n > 1 else 1
    h = -(-n // w)
    return w, h


def gen_random_planar(n: int, seed: int) -> Graph:
    """Connected planar graph: a random spanning tree of a grid skeleton plus a
    random subset of the remaining skeleton edges.

    The skeleton is the ceil(sqrt n) x ceil(n / ceil(sqrt n)) grid restricted to
    its first n cells in row-major order, which stays connected.
    """
    if n < 1:
        raise GraphError("n must be >= 1")
    if n > MAX_VERTICES:
        raise GraphError(f"graph too large: n={n}")
    w, _ = planar_skeleton_dims(n)
    skeleton = []
    for u in range(1, n + 1):
        c = (u - 1) % w
        if c + 1 < w and u + 1 <= n:
            skeleton.append((u, u + 1))
        if u + w <= n:
            skeleton.append((u, u + w))
    rng = random.Random(seed)
    rng.shuffle(skeleton)
    # Kruskal with random order gives a random spanning tree
    parent = list(range(n + 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree, rest = [], []
    for u, v in skeleton:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            tree.append((u, v))
        else:
            rest.append((u, v))
    keep = rng.random()
    extra = [e for e in rest if rng.random() < keep]
    return Graph(n, tree + extra)


def gen_path(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(1, n)])


def gen_cycle(n: int) -> Graph:
    if n < 3:
        raise GraphError("cycle needs at least 3 vertices")
    return Graph(n, [(i, i + 1) for i in range(1, n)] + [(n, 1)])


def gen_star(leaves: int, center: int = 1) -> Graph:
    """Star K_{1,leaves}; ``center`` picks which label is the hub."""
    n = leaves + 1
    if not 1 <= center <= n:
        raise VertexRangeError(f"center {center} not in 1..{n}")
    return Graph(n, [(center, v) for v in range(1, n + 1) if v != center])


def gen_complete(n: int) -> Graph:
    return Graph(n, [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)])
