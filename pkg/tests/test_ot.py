import itertools

import numpy as np
import pytest

from qot.channel import ChannelModel
from qot.ecc import build_code
from qot.ot import (InsufficientIndices, Strategy, code_for, decrypt_message, encrypt_messages,
                    keystream, partition_for_multi_ot, run_ot, sample_challenge_set)
from qot.rng import Drbg
from qot.secparams import SecurityParams
from qot.transport import MsgType

L = 256 - 1


def test_challenge_set_uniform_and_exact():
    r = Drbg(0)
    counts = np.zeros(20)
    for _ in range(20_000):
        t = sample_challenge_set(20, 10, r)
        assert t.size == 10 and np.unique(t).size == 10
        counts[t] += 1
    assert np.all(np.abs(counts / 20_000 - 0.5) < 3 * np.sqrt(0.25 / 20_000) + 0.005)
    assert sample_challenge_set(7, 7, r).tolist() == list(range(7))
    assert np.array_equal(sample_challenge_set(50, 9, Drbg(4)), sample_challenge_set(50, 9, Drbg(4)))
    with pytest.raises(ValueError):
        sample_challenge_set(3, 4, r)


def test_encryption_identities():
    r = Drbg(1)
    x0, x1 = r.bits(100), r.bits(140)
    s0, s1 = r.bits(100 + L), r.bits(140 + L)
    zero = bytes(32)
    (c0, c1), _ = encrypt_messages(x0, x1, s0, s1, zero, zero)
    assert c0 == keystream(s0, x0, 32) and c1 == keystream(s1, x1, 32)
    m0, m1 = r.random_bytes(50), r.random_bytes(50)
    (c0, c1), _ = encrypt_messages(x0, x1, s0, s1, m0, m1)
    assert decrypt_message(x0, s0, c0) == m0 and decrypt_message(x1, s1, c1) == m1
    with pytest.raises(ValueError):
        encrypt_messages(x0, x1, s0, s1, m0, m1[:-1])
    with pytest.raises(ValueError):
        encrypt_messages(x0, x1, s0[:-1], s1, m0, m1)


def test_one_flipped_key_bit_scrambles_the_message():
    r = Drbg(2)
    dist = []
    for _ in range(200):
        x, s, m = r.bits(300), r.bits(300 + L), r.random_bytes(32)
        (c, _), _ = encrypt_messages(x, x, s, s, m, m)
        y = x.copy()
        y[int(r.integers(300, 1)[0])] ^= 1
        out = decrypt_message(y, s, c)
        dist.append(np.unpackbits(np.frombuffer(bytes(a ^ b for a, b in zip(out, m)), np.uint8)).sum())
    assert abs(np.mean(dist) - 128) < 3 * 8 / np.sqrt(200) + 1


@pytest.mark.parametrize("b,pattern", list(itertools.product((0, 1), ("zeros", "ones", "mixed", "random"))))
def test_noiseless_completeness(small_params, b, pattern):
    r = Drbg(hash(pattern) & 0xFFFF)
    m = {"zeros": (bytes(32), bytes(32)), "ones": (b"\xff" * 32, b"\xff" * 32),
         "mixed": (bytes(32), b"\xff" * 32), "random": (r.random_bytes(32), r.random_bytes(32))}[pattern]
    res = run_ot(*m, b, small_params, seed=b * 10 + len(pattern))
    assert res.ok, (res.alice.status, res.bob.status)
    assert res.bob.message == m[b] and res.bob.decode_status == "ok"


def test_many_random_message_pairs(small_params):
    r = Drbg(3)
    for i in range(25):
        m0, m1, b = r.random_bytes(32), r.random_bytes(32), r.bit()
        res = run_ot(m0, m1, b, small_params, seed=r.random_bytes(32))
        assert res.ok and res.bob.message == (m0, m1)[b]


def test_message_length_is_free(small_params):
    for n in (1, 100):
        res = run_ot(b"\x01" * n, b"\x02" * n, 1, small_params, seed=n)
        assert res.bob.message == b"\x02" * n


def test_noisy_channel_runs(noisy_params):
    ok = sum(run_ot(b"a" * 32, b"b" * 32, i % 2, noisy_params, seed=i).ok for i in range(6))
    assert ok >= 5


def test_key_lengths_concentrate(small_params):
    lens = [run_ot(bytes(32), bytes(32), 0, small_params, seed=i).bob.key_lengths for i in range(8)]
    kept = small_params.lambda_ot  # 2*lambda_ot sent, half tested
    for a, c in lens:
        assert a + c == kept
        assert abs(a - kept / 2) < 4 * np.sqrt(kept / 4)


def test_transports_give_identical_transcripts(small_params):
    a = run_ot(b"x" * 32, b"y" * 32, 1, small_params, seed=77, transport="loopback")
    b = run_ot(b"x" * 32, b"y" * 32, 1, small_params, seed=77, transport="socket")
    assert a.alice.digest == b.alice.digest and a.bob.digest == b.bob.digest
    assert a.transcript_digest == a.alice.digest
    c = run_ot(b"x" * 32, b"y" * 32, 1, small_params, seed=78)
    assert c.alice.digest != a.alice.digest


def test_alice_view_does_not_depend_on_b(small_params):
    """Same seeds, b = 0 and b = 1: everything Alice receives before the
    partition is identical and the partition masks are complements."""
    runs = [run_ot(b"p" * 32, b"q" * 32, b, small_params, seed=5, record=True) for b in (0, 1)]
    views = [[f for f in r.alice.frames if f[0] == "<"] for r in runs]
    cut = [i for i, f in enumerate(views[0]) if f[1] == MsgType.OT_PARTITION][0]
    assert views[0][:cut] == views[1][:cut]
    p0, p1 = views[0][cut][2], views[1][cut][2]
    assert p0[:4] == p1[:4]
    n = int.from_bytes(p0[:4], "little")
    b0 = np.unpackbits(np.frombuffer(p0[4:], np.uint8))[:n]
    b1 = np.unpackbits(np.frombuffer(p1[4:], np.uint8))[:n]
    assert np.array_equal(b0, 1 - b1)
    assert [r.bob.message for r in runs] == [b"p" * 32, b"q" * 32]


def test_decode_failure_falls_back_to_junk():
    # a channel far noisier than the parameters admit: Alice's test still
    # passes (huge toy slack) but Bob's correction fails
    p = SecurityParams.toy(lambda_ot=512, alpha=0.0)
    model = ChannelModel(alpha=0.12, rng_seed=bytes(32))
    res = run_ot(bytes(32), bytes(32), 0, p, model=model, seed=1)
    if res.alice.status == "END":
        assert res.bob.decode_status in ("failed", "ok")
        if res.bob.decode_status == "failed":
            bits = np.unpackbits(np.frombuffer(res.bob.message, np.uint8))
            assert 64 < bits.sum() < 192


def test_params_mismatch_aborts_before_bb84(small_params):
    from qot.ot import PartyOutcome, alice_ot, bob_ot
    from qot.session import run_pair, session_seeds

    other = SecurityParams.toy(lambda_ot=640)
    ra, rb, ch = session_seeds(1)
    model = ChannelModel(rng_seed=ch)
    from qot.session import drive, make_pipes
    from qot.transport import Connection
    import threading

    pa, pb = make_pipes("loopback")
    out = {}
    ca, cb = Connection(pa, "alice", record=True), Connection(pb, "bob", record=True)
    t = threading.Thread(target=lambda: out.setdefault("a", drive(
        lambda c: alice_ot(c, bytes(32), bytes(32), small_params, model, ra), ca, small_params, PartyOutcome)))
    t.start()
    out["b"] = drive(lambda c: bob_ot(c, 0, other, model, rb), cb, other, PartyOutcome)
    t.join()
    assert out["a"].status == out["b"].status == "ABORT:params-digest"
    tags = {f[1] for f in ca.frames + cb.frames}
    assert MsgType.OT_BB84_BATCH not in tags


def test_toy_guard(small_params):
    with pytest.raises(ValueError, match="toy"):
        run_ot(bytes(32), bytes(32), 0, small_params, allow_toy=False)


def test_skipping_everything_is_caught():
    p = SecurityParams.toy(lambda_ot=512)
    res = run_ot(bytes(32), bytes(32), 0, p, seed=3, strategy=Strategy(skip=np.arange(1024)))
    assert res.alice.status.startswith("ABORT")


def test_fake_families_by_bob_are_caught_sometimes():
    p = SecurityParams.toy(lambda_ot=512)
    stages = {run_ot(bytes(32), bytes(32), 0, p, seed=i, strategy=Strategy(fake_families=(0, 2))).alice.status
              for i in range(8)}
    assert "ABORT:prg-check" in stages


def test_multi_ot_partition_structure():
    r = Drbg(6)
    th, th_hat = r.bits(4000), r.bits(4000)
    parts = partition_for_multi_ot(th, th_hat, 8, 400, choices=r.bits(8))
    used = np.concatenate([np.concatenate([p.I0, p.I1]) for p in parts])
    assert np.unique(used).size == used.size == 8 * 400
    for p, c in zip(parts, [None] * 8):
        good = p.I0 if (th[p.I0] == th_hat[p.I0]).all() else p.I1
        assert (th[good] == th_hat[good]).all()
    with pytest.raises(InsufficientIndices):
        partition_for_multi_ot(th, th_hat, 100, 400)


def test_code_for_is_shared_by_both_parties(small_params):
    assert code_for(small_params, 300) is code_for(small_params, 300)
    assert code_for(small_params, 300).q == 30


def test_multi_ot_full_size():
    """lambda_OT = 2^16, v = 2^12: sixteen OTs from one session at alpha = 0."""
    from qot.ot import run_multi_ot

    lam, v = 1 << 16, 1 << 12
    p = SecurityParams.toy(lambda_ot=lam)
    r = Drbg(1)
    n = lam // v
    pairs = [(r.random_bytes(32), r.random_bytes(32)) for _ in range(n)]
    res = run_multi_ot(pairs, r.bits(n), p, v, seed=2)
    assert res.alice.status == res.bob.status == "END"
    ex = res.bob.extra
    assert len(ex["messages"]) == 16
    assert 2 <= ex["half_block"] <= v // 2
    for i in range(n):
        assert ex["messages"][i] == pairs[i][ex["choices_by_pair"][i]]
        assert ex["messages"][i] != pairs[i][1 - ex["choices_by_pair"][i]]


def test_sixteen_concurrent_sessions_match_serial_runs():
    from concurrent.futures import ThreadPoolExecutor

    p = SecurityParams.toy(lambda_ot=256, m=32)
    jobs = [(bytes([i]) * 32, bytes([255 - i]) * 32, i % 2, 1000 + i) for i in range(16)]

    def one(job):
        m0, m1, b, s = job
        r = run_ot(m0, m1, b, p, seed=s)
        return r.ok, r.alice.digest, r.bob.digest

    with ThreadPoolExecutor(16) as pool:
        par = list(pool.map(one, jobs))
    assert par == [one(j) for j in jobs]
    assert all(ok for ok, _, _ in par)
