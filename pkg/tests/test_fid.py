import random
from itertools import accumulate

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from palmdiv.fid import Fid, FidNotFound, FidRangeError, fid_build, fid_space_report, rank, select


def naive_check(bits: list[int]) -> None:
    f = Fid(bits)
    ones = [0, *accumulate(bits)]
    assert f.length == len(bits)
    for i in range(len(bits) + 1):
        assert f.rank(1, i) == ones[i]
        assert f.rank(0, i) == i - ones[i]
    pos1 = [i for i, b in enumerate(bits, start=1) if b]
    pos0 = [i for i, b in enumerate(bits, start=1) if not b]
    assert [f.select(1, k) for k in range(1, len(pos1) + 1)] == pos1
    assert [f.select(0, k) for k in range(1, len(pos0) + 1)] == pos0
    assert [f.access(i) for i in range(1, len(bits) + 1)] == bits


def test_examples_10110():
    f = fid_build("10110")
    assert f.length == 5
    assert rank(f, 1, 3) == 2
    assert rank(f, 0, 5) == 2
    assert rank(f, 1, 0) == 0
    assert select(f, 1, 2) == 3
    assert select(f, 0, 1) == 2
    with pytest.raises(FidNotFound):
        select(f, 1, 4)


def test_empty_and_uniform():
    e = fid_build([])
    assert e.rank(1, 0) == 0 and e.rank(0, 0) == 0
    assert fid_space_report(e)["payload_bits"] == 0
    with pytest.raises(FidNotFound):
        e.select(1, 1)
    ones = fid_build([1] * 1000)
    assert ones.rank(1, 1000) == 1000
    assert ones.select(1, 1000) == 1000
    zeros = fid_build([0] * 1000)
    assert zeros.rank(1, 1000) == 0 and zeros.select(0, 777) == 777


def test_range_errors():
    f = fid_build("101")
    with pytest.raises(FidRangeError):
        f.rank(1, 4)
    with pytest.raises(FidRangeError):
        f.rank(1, -1)
    with pytest.raises(FidNotFound):
        f.select(0, 0)


@pytest.mark.parametrize("length", [1, 63, 64, 65, 511, 512, 513, 4096, 5000])
@pytest.mark.parametrize("density", [0.0, 0.01, 0.5, 0.99, 1.0])
def test_against_naive_scan(length, density):
    rng = random.Random(length * 1000 + int(density * 100))
    naive_check([1 if rng.random() < density else 0 for _ in range(length)])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 1), max_size=2000))
def test_rank_select_laws(bits):
    f = Fid(bits)
    for i in range(1, len(bits) + 1):
        assert f.rank(0, i) + f.rank(1, i) == i
        assert f.rank(bits[i - 1], i) - f.rank(bits[i - 1], i - 1) == 1
    for b in (0, 1):
        for k in range(1, f.rank(b, len(bits)) + 1):
            p = f.select(b, k)
            assert f.rank(b, p) == k and f.access(p) == b


def test_from_positions_matches_bits():
    rng = random.Random(5)
    pos = sorted(rng.sample(range(1, 3001), 400))
    bits = [0] * 3000
    for p in pos:
        bits[p - 1] = 1
    assert Fid.from_positions(3000, pos) == Fid(bits)
    assert Fid.from_positions(3000, pos).ones_positions() == pos
    with pytest.raises(FidRangeError):
        Fid.from_positions(5, [6])


def test_serialisation_round_trip():
    rng = random.Random(9)
    f = Fid([rng.getrandbits(1) for _ in range(1234)])
    data = b"xx" + f.to_bytes() + f.to_bytes()
    g, off = Fid.from_bytes(data, 2)
    h, end = Fid.from_bytes(data, off)
    assert g == f == h and end == len(data)


def test_space_overhead():
    rng = random.Random(1)
    big = Fid.from_positions(1 << 20, [p for p in range(1, (1 << 20) + 1) if rng.random() < 0.5])
    rep = fid_space_report(big)
    assert rep["payload_bits"] >= 1 << 20
    assert rep["aux_bits"] / rep["payload_bits"] < 0.5
    last = -1
    for k in range(0, 17, 2):
        aux = Fid([1, 0] * (1 << k)).space_report()["aux_bits"]
        assert aux >= last
        last = aux
