import numpy as np
import pytest

from qot.channel import (LOST, LOST_MARK, Basis, Bb84Batch, Bb84Instance, ChannelModel,
                         measure, measure_batch, prepare_batch, transmit)
from qot.rng import Drbg

N = 100_000


def run(model, n=N, seed=0):
    batch = prepare_batch(n, Drbg(seed, "prep"))
    sent = transmit(batch, model, model.generator("t"))
    bases = Drbg(seed, "bob").bits(n)
    return sent, bases, measure_batch(sent, bases, model, model.generator("m"))


def within(p_hat, p, n, k=4):
    return abs(p_hat - p) <= k * np.sqrt(max(p * (1 - p), 1e-12) / n)


def test_ideal_channel_matching_bases_agree():
    sent, bases, out = run(ChannelModel())
    same = bases == sent.basis
    assert np.array_equal(out[same], sent.bit[same])
    assert within(same.mean(), 0.5, N)


def test_mismatched_bases_give_uniform_bits():
    sent, bases, out = run(ChannelModel())
    other = bases != sent.basis
    assert within(out[other].mean(), 0.5, int(other.sum()))
    assert within((out[other] == sent.bit[other]).mean(), 0.5, int(other.sum()))


@pytest.mark.parametrize("alpha", [0.006, 0.05, 0.2])
def test_error_rate_matches_alpha(alpha):
    sent, bases, out = run(ChannelModel(alpha=alpha))
    same = bases == sent.basis
    rate = (out[same] != sent.bit[same]).mean()
    assert within(rate, alpha, int(same.sum()))


def test_loss_and_multiphoton_rates():
    sent, _, out = run(ChannelModel(loss_prob=0.3, vartheta=0.01))
    assert within((out == LOST_MARK).mean(), 0.3, N)
    assert within(sent.multiphoton.mean(), 0.01, N)
    assert np.array_equal(out == LOST_MARK, sent.lost)


def test_single_measure_and_lost_sentinel():
    rng = np.random.default_rng(0)
    assert measure(Bb84Instance(1, Basis.DIAG), Basis.DIAG, ChannelModel(), rng) == 1
    assert measure(Bb84Instance(0, Basis.RECT, lost=True), 0, ChannelModel(), rng) is LOST
    assert not LOST


def test_batch_serialization_roundtrip():
    b = transmit(prepare_batch(1000, Drbg(1)), ChannelModel(loss_prob=0.2, vartheta=0.1),
                 ChannelModel().generator("x"))
    assert Bb84Batch.from_bytes(b.to_bytes()) == b
    assert Bb84Batch.from_instances(list(b)) == b
    with pytest.raises(ValueError):
        Bb84Batch.from_bytes(b"\x10")


def test_model_validation():
    for kw in ({"alpha": 0.5}, {"alpha": -0.1}, {"loss_prob": 1.5}, {"vartheta": 1.0}):
        with pytest.raises(ValueError):
            ChannelModel(**kw)
    with pytest.raises(ValueError):
        prepare_batch(0, Drbg(1))


def test_same_seed_same_outcomes():
    m = ChannelModel(alpha=0.1, rng_seed=b"\x05" * 32)
    a = run(m, 1000, seed=4)[2]
    b = run(m, 1000, seed=4)[2]
    assert np.array_equal(a, b)
