"""PDIV binary container: save and reload an encoding with its DFS overlay and meta data.

Layout (little-endian)::

    b"PDIV"  u16 version  u16 section count
    repeated: u8 section id, u32 payload length, payload
    u32 CRC32 of everything before it

Section payloads are written with a compact tagged value codec (varint
integers, length-prefixed strings/bytes, tuples, lists, dicts and a few
registered record types). Dicts keep insertion order and sets are written
sorted, so saving a freshly loaded encoding reproduces the same bytes.
"""
from __future__ import annotations

import dataclasses
import struct
import zlib
from pathlib import Path
from typing import Any, BinaryIO

from .catalog import Catalog, CatalogKey, EntryExitPair
from .dfs import MiniSegment, Overlay
from .division import NestedDivision, assemble_division
from .encoding import Encoding, MicroLabel, MiniLabel
from .fid import Fid
from .graph import Graph
from .meta import EulerLca, Meta

MAGIC = b"PDIV"
VERSION = 1

SEC_PARAMS = 1
SEC_GRAPH = 2
SEC_DIVISION = 3
SEC_FIDS = 4
SEC_CATALOG = 5
SEC_INDEX = 6
SEC_OVERLAY = 7
SEC_META = 8


class ContainerError(ValueError):
    pass


class CorruptContainer(ContainerError):
    pass


class UnsupportedVersion(ContainerError):
    pass


# -- value codec ---------------------------------------------------------------

_RECORDS: list[type] = [MiniLabel, MicroLabel, EntryExitPair, MiniSegment, CatalogKey, Overlay, Meta]
_RECORD_ID = {cls: i for i, cls in enumerate(_RECORDS)}


def _put_uvarint(out: bytearray, x: int) -> None:
    while x >= 0x80:
        out.append((x & 0x7F) | 0x80)
        x >>= 7
    out.append(x)


def _put_int(out: bytearray, x: int) -> None:
    _put_uvarint(out, (x << 1) if x >= 0 else ((-x << 1) - 1))


def _encode(out: bytearray, v: Any) -> None:
    if v is None:
        out.append(0x4E)  # N
    elif v is True:
        out.append(0x54)  # T
    elif v is False:
        out.append(0x46)  # F
    elif isinstance(v, int) and type(v) is int:
        if not -(1 << 63) <= v < 1 << 63:
            raise ContainerError(f"integer {v} does not fit in 64 bits")
        out.append(0x69)  # i
        _put_int(out, v)
    elif isinstance(v, str):
        data = v.encode()
        out.append(0x73)  # s
        _put_uvarint(out, len(data))
        out += data
    elif isinstance(v, bytes):
        out.append(0x62)  # b
        _put_uvarint(out, len(v))
        out += v
    elif type(v) in _RECORD_ID:
        out.append(0x72)  # r
        _put_uvarint(out, _RECORD_ID[type(v)])
        if dataclasses.is_dataclass(v):
            values = [getattr(v, f.name) for f in dataclasses.fields(v)]
        else:
            values = list(v)
        _put_uvarint(out, len(values))
        for x in values:
            _encode(out, x)
    elif isinstance(v, EulerLca):
        out.append(0x65)  # e
        _encode(out, v.parent)
    elif isinstance(v, tuple):
        out.append(0x74)  # t
        _put_uvarint(out, len(v))
        for x in v:
            _encode(out, x)
    elif isinstance(v, list):
        out.append(0x6C)  # l
        _put_uvarint(out, len(v))
        for x in v:
            _encode(out, x)
    elif isinstance(v, (set, frozenset)):
        out.append(0x53)  # S
        items = sorted(v)
        _put_uvarint(out, len(items))
        for x in items:
            _encode(out, x)
    elif isinstance(v, dict):
        out.append(0x64)  # d
        _put_uvarint(out, len(v))
        for k, x in v.items():
            _encode(out, k)
            _encode(out, x)
    else:
        raise ContainerError(f"cannot serialise {type(v).__name__}")


def encode_value(v: Any) -> bytes:
    out = bytearray()
    _encode(out, v)
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def byte(self) -> int:
        if self.pos >= len(self.data):
            raise CorruptContainer("truncated value")
        b = self.data[self.pos]
        self.pos += 1
        return b

    def uvarint(self) -> int:
        x = shift = 0
        while True:
            b = self.byte()
            x |= (b & 0x7F) << shift
            if b < 0x80:
                return x
            shift += 7
            if shift > 70:
                raise CorruptContainer("varint too long")

    def raw(self, k: int) -> bytes:
        if self.pos + k > len(self.data):
            raise CorruptContainer("truncated value")
        chunk = self.data[self.pos:self.pos + k]
        self.pos += k
        return chunk

    def value(self) -> Any:
        tag = self.byte()
        if tag == 0x4E:
            return None
        if tag == 0x54:
            return True
        if tag == 0x46:
            return False
        if tag == 0x69:
            z = self.uvarint()
            return (z >> 1) if not z & 1 else -((z + 1) >> 1)
        if tag == 0x73:
            return self.raw(self.uvarint()).decode()
        if tag == 0x62:
            return self.raw(self.uvarint())
        if tag == 0x72:
            rid = self.uvarint()
            if rid >= len(_RECORDS):
                raise CorruptContainer(f"unknown record type {rid}")
            cls = _RECORDS[rid]
            values = [self.value() for _ in range(self.uvarint())]
            try:
                return cls(*values)
            except TypeError as exc:
                raise CorruptContainer(f"bad {cls.__name__} record") from exc
        if tag == 0x65:
            return EulerLca(self.value())
        if tag == 0x74:
            return tuple(self.value() for _ in range(self.uvarint()))
        if tag == 0x6C:
            return [self.value() for _ in range(self.uvarint())]
        if tag == 0x53:
            return {self.value() for _ in range(self.uvarint())}
        if tag == 0x64:
            out = {}
            for _ in range(self.uvarint()):
                k = self.value()
                out[k] = self.value()
            return out
        raise CorruptContainer(f"unknown value tag {tag:#x}")


def decode_value(data: bytes) -> Any:
    rd = _Reader(data)
    try:
        v = rd.value()
    except (RecursionError, UnicodeDecodeError, TypeError) as exc:
        raise CorruptContainer(str(exc)) from exc
    if rd.pos != len(data):
        raise CorruptContainer("trailing bytes in section")
    return v


# -- sections ------------------------------------------------------------------


def _division_payload(d: NestedDivision) -> Any:
    def pieces(div):
        return [(tuple(p.vertices), tuple(p.edges)) for p in div.pieces]

    return (d.r, d.r_tilde, pieces(d.mini), [pieces(sub) for sub in d.micro])


def _fid_payload(enc: Encoding) -> bytes:
    out = bytearray(enc.boundary_fid.to_bytes())
    for m in enc.minis:
        out += m.micro_fid.to_bytes()
    return bytes(out)


def _catalog_payload(cat: Catalog) -> Any:
    return (
        cat.max_piece,
        [e.key for e in cat.entries],
        (cat.hits, cat.misses, cat.color_swaps, cat.advances),
    )


def dumps(enc: Encoding) -> bytes:
    g = enc.graph
    sections: list[tuple[int, bytes]] = [
        (SEC_PARAMS, struct.pack("<III", g.n, enc.r, enc.r_tilde)),
        (SEC_GRAPH, encode_value(tuple(g.edges()))),
        (SEC_DIVISION, encode_value(_division_payload(enc.division))),
        (SEC_FIDS, _fid_payload(enc)),
        (SEC_CATALOG, encode_value(_catalog_payload(enc.catalog))),
        (SEC_INDEX, encode_value((enc.initial_index, enc.micro_index))),
    ]
    if enc.overlay is not None:
        sections.append((SEC_OVERLAY, encode_value(enc.overlay)))
    if enc.meta is not None:
        sections.append((SEC_META, encode_value(enc.meta)))
    out = bytearray(MAGIC)
    out += struct.pack("<HH", VERSION, len(sections))
    for sid, payload in sections:
        out += struct.pack("<BI", sid, len(payload))
        out += payload
    out += struct.pack("<I", zlib.crc32(out))
    return bytes(out)


def _split(data: bytes) -> dict[int, bytes]:
    if len(data) < 12 or data[:4] != MAGIC:
        raise CorruptContainer("not a PDIV container")
    version, count = struct.unpack_from("<HH", data, 4)
    if version != VERSION:
        raise UnsupportedVersion(f"container version {version} is not supported (expected {VERSION})")
    (crc,) = struct.unpack_from("<I", data, len(data) - 4)
    if zlib.crc32(data[:-4]) != crc:
        raise CorruptContainer("checksum mismatch")
    pos = 8
    sections: dict[int, bytes] = {}
    for _ in range(count):
        if pos + 5 > len(data) - 4:
            raise CorruptContainer("truncated section header")
        sid, length = struct.unpack_from("<BI", data, pos)
        pos += 5
        if pos + length > len(data) - 4 or sid in sections:
            raise CorruptContainer(f"bad section {sid}")
        sections[sid] = data[pos:pos + length]
        pos += length
    if pos != len(data) - 4:
        raise CorruptContainer("trailing bytes before checksum")
    for sid in (SEC_PARAMS, SEC_GRAPH, SEC_DIVISION, SEC_FIDS, SEC_CATALOG, SEC_INDEX):
        if sid not in sections:
            raise CorruptContainer(f"missing section {sid}")
    return sections


def loads(data: bytes) -> Encoding:
    sec = _split(data)
    n, r, r_tilde = struct.unpack("<III", sec[SEC_PARAMS])
    g = Graph(n, decode_value(sec[SEC_GRAPH]))
    dr, drt, mini_pieces, micro_pieces = decode_value(sec[SEC_DIVISION])
    if (dr, drt) != (r, r_tilde):
        raise CorruptContainer("division parameters disagree with header")
    division = NestedDivision(
        assemble_division(mini_pieces, r),
        [assemble_division(p, r_tilde) for p in micro_pieces],
        r,
        r_tilde,
    )
    max_piece, keys, counters = decode_value(sec[SEC_CATALOG])
    cat = Catalog(max_piece=max_piece)
    for k, key in enumerate(keys):
        if cat.intern(key) != k:
            raise CorruptContainer("duplicate catalog key")
    enc = Encoding(g, division, cat)
    cat.hits, cat.misses, cat.color_swaps, cat.advances = counters

    fids = sec[SEC_FIDS]
    stored, off = Fid.from_bytes(fids, 0)
    if stored.to_bytes() != enc.boundary_fid.to_bytes():
        raise CorruptContainer("boundary dictionary disagrees with division")
    for m in enc.minis:
        stored, off = Fid.from_bytes(fids, off)
        if stored.to_bytes() != m.micro_fid.to_bytes():
            raise CorruptContainer("micro boundary dictionary disagrees with division")
    if off != len(fids):
        raise CorruptContainer("trailing dictionary bytes")

    initial, current = decode_value(sec[SEC_INDEX])
    if initial != enc.initial_index:
        raise CorruptContainer("initial micro index disagrees with catalog")
    if [len(row) for row in current] != [len(row) for row in initial] or any(
        not 0 <= x < len(cat) for row in current for x in row
    ):
        raise CorruptContainer("micro index out of range")
    enc.micro_index = current
    if SEC_OVERLAY in sec:
        enc.overlay = decode_value(sec[SEC_OVERLAY])
    if SEC_META in sec:
        enc.meta = decode_value(sec[SEC_META])
    return enc


def save(enc: Encoding, target: str | Path | BinaryIO) -> None:
    data = dumps(enc)
    if isinstance(target, (str, Path)):
        Path(target).write_bytes(data)
    else:
        target.write(data)


def load(source: str | Path | BinaryIO) -> Encoding:
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    else:
        data = source.read()
    try:
        return loads(data)
    except ContainerError:
        raise
    except (ValueError, KeyError, IndexError, TypeError, struct.error) as exc:
        raise CorruptContainer(f"malformed container: {exc}") from exc
