"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 I/O or format error, 3 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import time
from pathlib import Path
from typing import Callable, Sequence, TextIO

from . import container
from .checks import verify_encoding
from .dfs import back_edges_out, children_iter, dfs, entry_exit_log, parent, preorder
from .division import DivisionError, duplicate_stats
from .encoding import Encoding, build_encoding
from .graph import (
    Graph,
    GraphError,
    VertexRangeError,
    dump_edge_list,
    gen_complete,
    gen_cycle,
    gen_grid,
    gen_path,
    gen_random_planar,
    gen_star,
    load_edge_list,
)
from .meta import preprocess_meta, resolver

log = logging.getLogger("palmdiv")

EXIT_USAGE = 1
EXIT_IO = 2
EXIT_VERIFY = 3

STATS_COLUMNS = (
    "n", "m", "r", "r_tilde", "mini_dupes", "micro_dupes",
    "fid_bits", "side_bits", "catalog_bits", "build_ms", "dfs_ms",
)


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {v}")
    return v


def _grid_dims(text: str) -> tuple[int, int]:
    try:
        w, h = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError("grid sides must be >= 1")
    return w, h


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="palmdiv", description="Compact DFS encodings of separable graphs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a graph as an edge list")
    kind = g.add_mutually_exclusive_group(required=True)
    kind.add_argument("--grid", type=_grid_dims, metavar="WxH")
    kind.add_argument("--random-planar", type=_positive, metavar="N")
    kind.add_argument("--path", type=_positive, metavar="N")
    kind.add_argument("--cycle", type=_positive, metavar="N")
    kind.add_argument("--star", type=_positive, metavar="LEAVES")
    kind.add_argument("--complete", type=_positive, metavar="N")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--output", "-o", help="edge-list file (default: stdout)")

    b = sub.add_parser("build", help="build an encoding container from an edge list")
    b.add_argument("--input", "-i", required=True, help="edge-list file ('-' for stdin)")
    b.add_argument("--output", "-o", required=True, help="container file")
    b.add_argument("--r", type=_positive)
    b.add_argument("--rtilde", type=_positive)

    d = sub.add_parser("dfs", help="run a DFS and store the palm tree in the container")
    d.add_argument("--input", "-i", required=True, help="container file")
    d.add_argument("--output", "-o", help="container file (default: overwrite input)")
    d.add_argument("--start", type=_positive, default=1)

    q = sub.add_parser("query", help="answer queries on a container that holds a DFS")
    q.add_argument("--input", "-i", required=True, help="container file")
    q.add_argument("query", nargs="*", help=f"verb and arguments; verbs: {', '.join(sorted(QUERY_VERBS))}; "
                   "omit to read one query per line from stdin")

    v = sub.add_parser("verify", help="check every property against brute-force references")
    v.add_argument("--input", "-i", required=True, help="edge list or container")
    v.add_argument("--start", type=_positive, default=None)
    v.add_argument("--r", type=_positive)
    v.add_argument("--rtilde", type=_positive)
    v.add_argument("--seed", type=int, default=0, help="seed for sampled lca pairs")

    s = sub.add_parser("stats", help="space and time statistics")
    s.add_argument("--input", "-i", required=True, help="edge-list file")
    s.add_argument("--start", type=_positive, default=1)
    s.add_argument("--r", type=_positive)
    s.add_argument("--rtilde", type=_positive)
    s.add_argument("--csv", help="append one row to this CSV file")
    return p


# -- queries -------------------------------------------------------------------------


def _ints(args: Sequence[str], k: int, verb: str) -> list[int]:
    if len(args) != k:
        raise UsageError(f"{verb} takes {k} argument(s), got {len(args)}")
    try:
        return [int(a) for a in args]
    except ValueError:
        raise UsageError(f"{verb}: arguments must be integers") from None


def _fmt_list(xs) -> str:
    return " ".join(map(str, xs))


QUERY_VERBS: dict[str, tuple[int, Callable]] = {
    "st_number": (1, lambda enc, res, u: res.st(u)),
    "depth": (1, lambda enc, res, u: res.depth(u)),
    "num_descendants": (1, lambda enc, res, u: res.nd(u)),
    "lowpoint": (1, lambda enc, res, u: res.lowpoint(u)),
    "lca": (2, lambda enc, res, u, v: res.lca(u, v)),
    "parent": (1, lambda enc, res, u: parent(enc, u) or 0),
    "children": (1, lambda enc, res, u: _fmt_list(children_iter(enc, u))),
    "back_edges": (1, lambda enc, res, u: _fmt_list(back_edges_out(enc, u))),
    "degree": (1, lambda enc, res, u: enc.level_degree(u)),
    "adjacent": (2, lambda enc, res, u, v: int(enc.level_adjacent(u, v))),
    "neighbors": (1, lambda enc, res, u: _fmt_list(enc.level_neighbors(u))),
    "entry_exit": (1, lambda enc, res, i: _fmt_list(f"{p.entry}:{p.exit}" for p in entry_exit_log(enc, i, "mini"))),
}


def answer(enc: Encoding, res, tokens: Sequence[str]) -> str:
    if not tokens:
        raise UsageError("empty query")
    verb, *args = tokens
    if verb not in QUERY_VERBS:
        raise UsageError(f"unknown query verb {verb!r}")
    arity, fn = QUERY_VERBS[verb]
    vals = _ints(args, arity, verb)
    if verb != "entry_exit":
        for u in vals:
            enc._check_vertex(u)
    result = fn(enc, res, *vals)
    return f"{verb} {' '.join(args)} = {result}"


# -- commands -----------------------------------------------------------------------------


def _parse_graph(data: bytes | str, path: str) -> Graph:
    try:
        return load_edge_list(data)
    except GraphError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _read_graph(path: str) -> Graph:
    return _parse_graph(sys.stdin.read() if path == "-" else Path(path).read_bytes(), path)


def _write_text(path: str | None, text: str, out: TextIO) -> None:
    if path is None or path == "-":
        out.write(text)
    else:
        Path(path).write_text(text)


def cmd_gen(a, out: TextIO) -> int:
    if a.grid:
        g = gen_grid(*a.grid)
    elif a.random_planar:
        g = gen_random_planar(a.random_planar, a.seed)
    elif a.path:
        g = gen_path(a.path)
    elif a.cycle:
        g = gen_cycle(a.cycle)
    elif a.star:
        g = gen_star(a.star)
    else:
        g = gen_complete(a.complete)
    _write_text(a.output, dump_edge_list(g), out)
    log.info("generated %r", g)
    return 0


def cmd_build(a, out: TextIO) -> int:
    g = _read_graph(a.input)
    t0 = time.perf_counter()
    enc = build_encoding(g, a.r, a.rtilde)
    ms = (time.perf_counter() - t0) * 1000
    container.save(enc, a.output)
    out.write(f"built n={g.n} m={g.m} r={enc.r} r_tilde={enc.r_tilde} "
              f"mini={enc.mini_count()} micro={enc.micro_count()} in {ms:.0f} ms\n")
    return 0


def cmd_dfs(a, out: TextIO) -> int:
    enc = container.load(a.input)
    enc._check_vertex(a.start)
    dfs(enc, a.start)
    preprocess_meta(enc)
    container.save(enc, a.output or a.input)
    order = preorder(enc)
    shown = _fmt_list(order[:20]) + (" ..." if len(order) > 20 else "")
    out.write(f"dfs start={a.start} vertices={len(order)} preorder = {shown}\n")
    return 0


def cmd_query(a, out: TextIO) -> int:
    enc = container.load(a.input)
    if enc.meta is None:
        raise UsageError("container holds no DFS; run the dfs command first")
    res = resolver(enc)
    if a.query:
        out.write(answer(enc, res, a.query) + "\n")
        return 0
    for line in sys.stdin:
        tokens = line.split()
        if tokens:
            out.write(answer(enc, res, tokens) + "\n")
    return 0


def _load_any(path: str, r: int | None, r_tilde: int | None) -> Encoding:
    data = sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()
    if data.startswith(container.MAGIC):
        return container.loads(data)
    return build_encoding(_parse_graph(data, path), r, r_tilde)


def cmd_verify(a, out: TextIO) -> int:
    enc = _load_any(a.input, a.r, a.rtilde)
    if enc.overlay is None or (a.start is not None and a.start != enc.overlay.root):
        start = a.start or 1
        enc._check_vertex(start)
        dfs(enc, start)
        preprocess_meta(enc)
    elif enc.meta is None:
        preprocess_meta(enc)
    results = verify_encoding(enc, seed=a.seed)
    for r in results:
        out.write(r.line() + "\n")
    return 0 if all(r.ok for r in results) else EXIT_VERIFY


def collect_stats(g: Graph, start: int = 1, r: int | None = None, r_tilde: int | None = None) -> dict:
    t0 = time.perf_counter()
    enc = build_encoding(g, r, r_tilde)
    t1 = time.perf_counter()
    dfs(enc, start)
    t2 = time.perf_counter()
    preprocess_meta(enc)
    row = dict(enc.space_report())
    row.update(duplicate_stats(enc.division))
    row["build_ms"] = round((t1 - t0) * 1000, 1)
    row["dfs_ms"] = round((t2 - t1) * 1000, 1)
    for k, v in enc.catalog.stats().items():
        row[f"catalog_{k}"] = v
    return row


def cmd_stats(a, out: TextIO) -> int:
    g = _read_graph(a.input)
    row = collect_stats(g, a.start, a.r, a.rtilde)
    width = max(map(len, row))
    for k, v in row.items():
        shown = f"{v:.4f}" if isinstance(v, float) and k == "catalog_hit_rate" else v
        out.write(f"{k:<{width}}  {shown}\n")
    if a.csv:
        path = Path(a.csv)
        fresh = not path.exists() or path.stat().st_size == 0
        with path.open("a", newline="") as fh:
            w = csv.writer(fh)
            if fresh:
                w.writerow(STATS_COLUMNS)
            w.writerow([row[c] for c in STATS_COLUMNS])
    return 0


COMMANDS = {
    "gen": cmd_gen,
    "build": cmd_build,
    "dfs": cmd_dfs,
    "query": cmd_query,
    "verify": cmd_verify,
    "stats": cmd_stats,
}


def _setup_logging() -> None:
    level = os.environ.get("PALMDIV_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    _setup_logging()
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except (UsageError, VertexRangeError) as exc:
        print(f"palmdiv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, InputError, DivisionError, container.ContainerError) as exc:
        print(f"palmdiv: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
