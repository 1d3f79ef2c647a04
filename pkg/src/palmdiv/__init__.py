"""Compact encodings of separable graphs with an o(n)-bit DFS overlay.

Typical use::

    from palmdiv import build_encoding, dfs, preprocess_meta, resolver, gen_grid

    enc = build_encoding(gen_grid(16, 16))
    dfs(enc, start=1)
    preprocess_meta(enc)
    res = resolver(enc)
    res.st(6), res.lowpoint(9), res.lca(4, 5)
"""
from .catalog import Catalog, CatalogEntry, CatalogKey, EntryExitPair
from .container import ContainerError, CorruptContainer, UnsupportedVersion, dumps, load, loads, save
from .dfs import (
    back_edges,
    back_edges_in,
    back_edges_out,
    children_iter,
    dfs,
    entry_exit_log,
    parent,
    preorder,
    tree_edges,
)
from .division import NestedDivision, RelaxedDivision, default_params, duplicate_stats, nested_division
from .encoding import Encoding, MicroLabel, MiniLabel, build_encoding
from .fid import Fid, fid_build, rank, select
from .graph import (
    Graph,
    GraphError,
    ParseError,
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
from .meta import depth, lca, lowpoint, num_descendants, preprocess_meta, resolver, st_number

__version__ = "0.1.0"

__all__ = [
    "Catalog", "CatalogEntry", "CatalogKey", "ContainerError", "CorruptContainer", "Encoding",
    "EntryExitPair", "Fid", "Graph", "GraphError", "MicroLabel", "MiniLabel", "NestedDivision",
    "ParseError", "RelaxedDivision", "UnsupportedVersion", "VertexRangeError", "back_edges",
    "back_edges_in", "back_edges_out", "build_encoding", "children_iter", "default_params", "depth",
    "dfs", "dump_edge_list", "dumps", "duplicate_stats", "entry_exit_log", "fid_build", "gen_complete",
    "gen_cycle", "gen_grid", "gen_path", "gen_random_planar", "gen_star", "lca", "load", "load_edge_list",
    "loads", "lowpoint", "nested_division", "num_descendants", "parent", "preorder", "preprocess_meta",
    "rank", "resolver", "save", "select", "st_number", "tree_edges",
]
