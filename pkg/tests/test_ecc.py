import numpy as np
import pytest

import oracles
from qot.ecc import (DecodeFailure, build_code, column_weight_for, decode, default_syndrome_len,
                     syndrome)

SMALL_SHAPES = [(8, 4), (12, 6), (16, 8), (20, 8), (24, 10), (24, 12), (20, None), (24, None)]


def test_code_shape_and_degrees():
    code = build_code(1024)
    assert code.q == default_syndrome_len(1024) == 103
    assert code.column_weight == column_weight_for(1024, 103) == 4
    rw = code.row_weights()
    assert rw.max() - rw.min() <= 1
    assert (code.H.sum(axis=0) == 4).all()
    assert len({tuple(c) for c in code.col_rows.tolist()}) == code.n


def test_code_is_deterministic_in_seed():
    a = build_code(300, seed=b"\x01" * 32)
    b = build_code.__wrapped__(300, seed=b"\x01" * 32)
    c = build_code(300, seed=b"\x02" * 32)
    assert np.array_equal(a.H, b.H)
    assert not np.array_equal(a.H, c.H)


def test_tiny_syndromes_keep_rank():
    for n in (10, 20, 24, 30):
        code = build_code(n)
        assert oracles.gf2_rank(code.H) == code.q


def test_syndrome_is_linear():
    code = build_code(500)
    r = np.random.default_rng(0)
    a, b = r.integers(0, 2, (2, 500), dtype=np.uint8)
    assert np.array_equal(syndrome(code, a ^ b), syndrome(code, a) ^ syndrome(code, b))
    assert np.array_equal(syndrome(code, a), code.H.astype(int) @ a % 2)


def test_bad_shapes_rejected():
    with pytest.raises(ValueError):
        build_code(10, 10)
    with pytest.raises(ValueError):
        decode(build_code(10), np.zeros(10, np.uint8), np.zeros(1, np.uint8), method="magic")


@pytest.mark.parametrize("n,q", SMALL_SHAPES)
@pytest.mark.parametrize("method", ["auto", "bp"])
def test_small_codes_match_brute_force_coset_leaders(n, q, method):
    """Every syndrome with a unique minimum-weight coset leader decodes to it,
    both with the exhaustive path and with the iterative BP/OSD pipeline."""
    code = build_code(n, q, seed=b"\x02" * 32)
    leaders = oracles.coset_leaders(code.H)
    rng = np.random.default_rng(n)
    checked = 0
    for s, es in leaders.items():
        y = rng.integers(0, 2, n, dtype=np.uint8)
        target = (np.array(s, np.uint8) + syndrome(code, y)) % 2
        got = decode(code, y, target, error_rate=0.1, method=method)
        assert not isinstance(got, DecodeFailure)
        assert np.array_equal(syndrome(code, got), target)
        # always some minimum-weight correction; exactly the leader when unique
        assert int((got ^ y).sum()) == int(es[0].sum())
        if len(es) == 1:
            assert np.array_equal(got ^ y, es[0])
            checked += 1
    assert checked >= 1


def test_max_flips_is_respected():
    code = build_code(16, 8)
    e = np.zeros(16, np.uint8)
    e[[1, 5, 9]] = 1
    out = decode(code, np.zeros(16, np.uint8), syndrome(code, e), max_flips=0)
    assert isinstance(out, DecodeFailure) and not out


def test_zero_error_is_identity():
    code = build_code(2048)
    x = np.random.default_rng(1).integers(0, 2, 2048, dtype=np.uint8)
    assert np.array_equal(decode(code, x, syndrome(code, x)), x)


@pytest.mark.parametrize("n,p,floor", [(2048, 0.002, 0.97), (1024, 0.003, 0.95)])
def test_large_code_decodes_light_noise(n, p, floor):
    code = build_code(n, seed=b"\x03" * 32)
    rng = np.random.default_rng(n)
    ok = 0
    for _ in range(200):
        x = rng.integers(0, 2, n, dtype=np.uint8)
        e = (rng.random(n) < p).astype(np.uint8)
        got = decode(code, x ^ e, syndrome(code, x), error_rate=p)
        ok += not isinstance(got, DecodeFailure) and np.array_equal(got, x)
    assert ok / 200 >= floor
