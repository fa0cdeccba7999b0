import pytest

from qot.adversary import (AttackReport, attack_binding, attack_params, equivocation_opens_both,
                           fake_seed_family, skip_measurement)


@pytest.mark.parametrize("t", range(0, 9))
def test_binding_attack_frequency(t):
    rep = attack_binding(t, 20_000, seed=100 + t)
    assert rep.expected == 2.0 ** -t
    assert rep.within(3), rep.to_dict()


def test_binding_attack_is_reproducible():
    assert attack_binding(3, 5000, seed=1) == attack_binding(3, 5000, seed=1)


def test_binding_rejects_bad_arguments():
    with pytest.raises(ValueError):
        attack_binding(-1, 10)
    with pytest.raises(ValueError):
        attack_binding(2, 0)


def test_equivocal_commitment_opens_both_ways():
    assert all(equivocation_opens_both(seed=s) for s in range(5))


@pytest.mark.parametrize("c", [1, 2])
def test_fake_family_detection(c):
    rep = fake_seed_family(c, 120, seed=c)
    assert rep.within(3), rep.to_dict()


def test_no_fake_family_means_no_abort():
    rep = fake_seed_family(0, 20, seed=9)
    assert rep.count == 0


def test_fake_family_count_bounded_by_k():
    with pytest.raises(ValueError):
        fake_seed_family(attack_params().k + 1, 1)


def test_skipping_many_positions_is_caught():
    rep = skip_measurement(1024, 3, seed=2)
    assert rep.count == 3 and rep.expected is None and rep.within()


def test_report_fields():
    r = AttackReport("x", 1, 100, 50, 0.5)
    assert r.frequency == 0.5 and r.sigma == pytest.approx(0.05)
    d = r.to_dict()
    assert d["within_3sigma"] and d["count"] == 50
