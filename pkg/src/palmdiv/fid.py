"""Fully indexable dictionary: rank/select over a plain bit string.

Positions are 1-based. The payload is packed into 64-bit words; a two-level
rank directory (superblocks of 512 bits holding absolute counts, 64-bit blocks
holding counts relative to their superblock) plus a sample of every 512th
occurrence of each bit value for select.
"""
from __future__ import annotations

import struct
from typing import Iterable, Sequence

WORD = 64
SUPER = 512
WORDS_PER_SUPER = SUPER // WORD
SELECT_SAMPLE = 512
FORMAT_VERSION = 1


class FidError(Exception):
    pass


class FidRangeError(FidError, IndexError):
    pass


class FidNotFound(FidError, LookupError):
    pass


def _width(x: int) -> int:
    return max(1, int(x).bit_length())


class Fid:
    __slots__ = ("length", "words", "_super", "_block", "_samples", "ones")

    def __init__(self, bits: Iterable[int] | str = ()):
        if isinstance(bits, str):
            bits = [1 if ch == "1" else 0 for ch in bits if ch in "01"]
        words: list[int] = []
        length = 0
        cur = 0
        for b in bits:
            if b:
                cur |= 1 << (length % WORD)
            length += 1
            if length % WORD == 0:
                words.append(cur)
                cur = 0
        if length % WORD:
            words.append(cur)
        self.length = length
        self.words = words
        self._build()

    @classmethod
    def from_positions(cls, length: int, ones: Iterable[int]) -> "Fid":
        """Build from the 1-based positions of the set bits."""
        f = cls.__new__(cls)
        words = [0] * ((length + WORD - 1) // WORD)
        for p in ones:
            if not 1 <= p <= length:
                raise FidRangeError(f"position {p} outside 1..{length}")
            i = p - 1
            words[i // WORD] |= 1 << (i % WORD)
        f.length = length
        f.words = words
        f._build()
        return f

    def _build(self) -> None:
        supers: list[int] = []
        blocks: list[int] = []
        total = 0
        rel = 0
        for wi, w in enumerate(self.words):
            if wi % WORDS_PER_SUPER == 0:
                supers.append(total)
                rel = 0
            blocks.append(rel)
            c = w.bit_count()
            total += c
            rel += c
        self.ones = total
        self._super = supers
        self._block = blocks
        # select samples: word index holding the (k*SAMPLE + 1)-th occurrence
        samples: tuple[list[int], list[int]] = ([], [])
        seen = [0, 0]
        for wi, w in enumerate(self.words):
            nbits = min(WORD, self.length - wi * WORD)
            c1 = w.bit_count()
            counts = (nbits - c1, c1)
            for b in (0, 1):
                while seen[b] + counts[b] > len(samples[b]) * SELECT_SAMPLE:
                    samples[b].append(wi)
                seen[b] += counts[b]
        self._samples = samples

    # -- queries ----------------------------------------------------------

    def __len__(self) -> int:
        return self.length

    def access(self, i: int) -> int:
        if not 1 <= i <= self.length:
            raise FidRangeError(f"position {i} outside 1..{self.length}")
        i -= 1
        return (self.words[i // WORD] >> (i % WORD)) & 1

    def rank1(self, i: int) -> int:
        if not 0 <= i <= self.length:
            raise FidRangeError(f"rank index {i} outside 0..{self.length}")
        if i == 0:
            return 0
        wi, off = divmod(i, WORD)
        if off == 0:
            wi -= 1
            off = WORD
        r = self._super[wi // WORDS_PER_SUPER] + self._block[wi]
        mask = (1 << off) - 1
        return r + (self.words[wi] & mask).bit_count()

    def rank(self, b: int, i: int) -> int:
        r1 = self.rank1(i)
        return r1 if b else i - r1

    def _rank_before_word(self, b: int, wi: int) -> int:
        r1 = self._super[wi // WORDS_PER_SUPER] + self._block[wi]
        return r1 if b else wi * WORD - r1

    def select(self, b: int, i: int) -> int:
        """Position of the i-th occurrence of bit b (1-based)."""
        total = self.ones if b else self.length - self.ones
        if not 1 <= i <= total:
            raise FidNotFound(f"select_{b}({i}): only {total} occurrences")
        samples = self._samples[b]
        k = (i - 1) // SELECT_SAMPLE
        lo = samples[k]
        hi = samples[k + 1] if k + 1 < len(samples) else len(self.words) - 1
        # last word wi in [lo, hi] with rank_before(wi) < i
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self._rank_before_word(b, mid) < i:
                lo = mid
            else:
                hi = mid - 1
        wi = lo
        need = i - self._rank_before_word(b, wi)
        w = self.words[wi] if b else ~self.words[wi]
        for off in range(WORD):
            if (w >> off) & 1:
                need -= 1
                if need == 0:
                    return wi * WORD + off + 1
        raise FidError("corrupt select directory")  # pragma: no cover

    def ones_positions(self) -> list[int]:
        out = []
        for wi, w in enumerate(self.words):
            while w:
                low = w & -w
                out.append(wi * WORD + low.bit_length())
                w ^= low
        return out

    # -- accounting / serialization -----------------------------------------

    def space_report(self) -> dict[str, int]:
        lw = _width(self.length)
        aux = len(self._super) * lw + len(self._block) * _width(SUPER)
        aux += (len(self._samples[0]) + len(self._samples[1])) * _width(len(self.words))
        return {"payload_bits": self.length, "aux_bits": aux}

    def to_bytes(self) -> bytes:
        head = struct.pack("<BQ", FORMAT_VERSION, self.length)
        return head + struct.pack(f"<{len(self.words)}Q", *self.words)

    @classmethod
    def from_bytes(cls, data: bytes, offset: int = 0) -> tuple["Fid", int]:
        """Decode a serialized Fid starting at ``offset``; returns (fid, new offset)."""
        version, length = struct.unpack_from("<BQ", data, offset)
        if version != FORMAT_VERSION:
            raise FidError(f"unsupported fid version {version}")
        offset += 9
        nwords = (length + WORD - 1) // WORD
        words = list(struct.unpack_from(f"<{nwords}Q", data, offset))
        offset += 8 * nwords
        if nwords and length % WORD and words[-1] >> (length % WORD):
            raise FidError("padding bits set")
        f = cls.__new__(cls)
        f.length = length
        f.words = words
        f._build()
        return f, offset

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Fid) and self.length == other.length and self.words == other.words

    def __repr__(self) -> str:
        return f"Fid(length={self.length}, ones={self.ones})"


def fid_build(bits: Sequence[int] | str) -> Fid:
    return Fid(bits)


def rank(f: Fid, b: int, i: int) -> int:
    return f.rank(b, i)


def select(f: Fid, b: int, i: int) -> int:
    return f.select(b, i)


def fid_space_report(f: Fid) -> dict[str, int]:
    return f.space_report()
