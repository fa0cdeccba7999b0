import numpy as np
import pytest

from qot.bitops import as_bits, from_int, hamming, pack, to_int, unpack, xor
from qot.rng import Drbg, normalize_seed


def test_pack_is_msb_first_and_zero_padded():
    assert pack([1, 0, 1]) == b"\xa0"
    assert pack([0] * 7 + [1, 1]) == b"\x01\x80"
    assert pack([]) == b""


@pytest.mark.parametrize("n", [1, 7, 8, 9, 255, 1000])
def test_pack_roundtrip(n):
    bits = np.random.default_rng(n).integers(0, 2, n, dtype=np.uint8)
    assert np.array_equal(unpack(pack(bits), n), bits)


def test_int_conversions():
    assert to_int([1, 0, 1, 1]) == 11
    assert from_int(11, 6).tolist() == [0, 0, 1, 0, 1, 1]
    assert hamming([1, 1, 0], [0, 1, 1]) == 2
    assert xor([1, 0], [1, 1]).tolist() == [0, 1]


def test_as_bits_rejects_non_binary():
    with pytest.raises(ValueError):
        as_bits([0, 2])


def test_drbg_is_deterministic_and_labels_separate():
    a, b = Drbg(b"s", "x"), Drbg(b"s", "x")
    assert a.random_bytes(100) == b.random_bytes(100)
    assert Drbg(b"s", "x").random_bytes(32) != Drbg(b"s", "y").random_bytes(32)
    assert Drbg(b"s", "x").spawn("c").random_bytes(32) != Drbg(b"s", "x").spawn("d").random_bytes(32)


def test_drbg_stream_does_not_depend_on_chunking():
    a, b = Drbg(1, "t"), Drbg(1, "t")
    whole = a.random_bytes(5000)
    parts = b"".join(b.random_bytes(k) for k in (1, 999, 4000))
    assert whole == parts


def test_drbg_bits_are_balanced():
    bits = Drbg(7).bits(200_000)
    assert abs(bits.mean() - 0.5) < 4 * 0.5 / np.sqrt(bits.size)


def test_drbg_integers_uniform_and_subset_sorted():
    r = Drbg(3)
    v = r.integers(6, 60_000)
    counts = np.bincount(v, minlength=6)
    assert v.min() >= 0 and v.max() < 6
    assert (np.abs(counts - 10_000) < 5 * np.sqrt(10_000)).all()
    s = r.subset(100, 30)
    assert s.size == 30 and np.all(np.diff(s) > 0)
    assert sorted(r.permutation(50).tolist()) == list(range(50))


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("QOT_SEED", "1234")
    assert Drbg(None, "e").random_bytes(16) == Drbg(1234, "e").random_bytes(16)
    monkeypatch.delenv("QOT_SEED")
    assert Drbg(None, "e").random_bytes(16) != Drbg(None, "e").random_bytes(16)


def test_normalize_seed_forms():
    assert normalize_seed("0x10") == normalize_seed(16)
    assert len(normalize_seed("hello")) == 32
    with pytest.raises(ValueError):
        normalize_seed(-1)
