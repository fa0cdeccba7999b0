import math
import time

import numpy as np
import pytest

from oracles import h2 as h2_oracle
from qot import secparams as sp
from qot.secparams import DomainError, Infeasible, SecurityParams

IDEAL = dict(lambda_ot=2993093, lambda_ex=6676852, m=2158, k=3094, w=3870)


def test_binary_entropy_values():
    assert sp.binary_entropy(0.5) == 1.0
    assert sp.binary_entropy(0.0) == 0.0 and sp.binary_entropy(1.0) == 0.0
    assert sp.binary_entropy(0.11) == pytest.approx(0.4999, abs=1e-3)
    xs = np.linspace(0.01, 0.99, 37)
    assert np.allclose(sp.binary_entropy(xs), [h2_oracle(x) for x in xs])
    for bad in (-0.1, 1.2, float("nan")):
        with pytest.raises(DomainError):
            sp.binary_entropy(bad)


def test_chi_model():
    assert sp.chi_of_k(1024) == pytest.approx(100 / 1024)
    p = SecurityParams.toy(1024)
    assert p.eta == p.zeta == p.chi / 2


def _ideal():
    p, _ = sp.optimize_params()
    return p


@pytest.fixture(scope="module")
def ideal():
    return _ideal()


def _sweep(p, name, lo, hi):
    vals = []
    for x in np.linspace(lo, hi, 20):
        q = p.__class__(**{**p.__dict__, name: type(getattr(p, name))(x)})
        vals.append((sp.bound_ot_malicious_bob(q), sp.bound_ere_malicious_receiver(q)))
    return np.array(vals)


def test_bounds_decrease_in_block_sizes(ideal):
    v = _sweep(ideal, "lambda_ot", ideal.lambda_ot * 0.6, ideal.lambda_ot * 1.5)
    assert np.all(np.diff(v[:, 0]) <= 0)
    v = _sweep(ideal, "m", ideal.m * 0.9, ideal.m * 1.5)
    assert np.all(np.diff(v[:, 1]) <= 0)


def test_bounds_increase_with_noise(ideal):
    v = _sweep(ideal, "alpha", 0.0, 0.01)
    assert np.all(np.diff(v[:, 0]) >= 0) and np.all(np.diff(v[:, 1]) >= 0)
    v = _sweep(ideal, "vartheta", 0.0, 1e-4)
    assert np.all(np.diff(v[:, 0]) >= 0) and np.all(np.diff(v[:, 1]) >= 0)


def test_domain_errors(ideal):
    with pytest.raises(DomainError):
        sp.bound_ot_malicious_bob(ideal.__class__(**{**ideal.__dict__, "alpha": 0.5}))
    with pytest.raises(DomainError):
        sp.bound_ot_malicious_bob(ideal.__class__(**{**ideal.__dict__, "alpha": 0.45}))
    with pytest.raises(DomainError):
        sp.bound_ere_malicious_receiver(ideal.__class__(**{**ideal.__dict__, "vartheta": 0.4}))
    with pytest.raises(DomainError):
        sp.bound_multi_ot(ideal, 2, 7)


def test_ideal_optimum(ideal):
    assert ideal.n_bb84 == 2 * ideal.lambda_ot + 4 * ideal.lambda_ex
    assert abs(ideal.n_bb84 / 3.33e7 - 1) < 0.10
    assert sp.bound_ot_malicious_bob(ideal) <= 1e-15
    assert sp.bound_ere_malicious_receiver(ideal) <= 1e-15
    assert ideal.lambda_ex == ideal.k * ideal.m
    for key, val in IDEAL.items():
        assert abs(getattr(ideal, key) / val - 1) < 0.1, key


def test_noisy_optimum_is_infeasible_under_our_chi_model():
    with pytest.raises(Infeasible):
        sp.optimize_params(alpha=0.006, vartheta=0.001)


def test_multi_ot_block(ideal):
    v, n_ot = sp.smallest_block(ideal)
    assert sp.bound_multi_ot(ideal, v) <= ideal.target_delta
    assert n_ot == ideal.lambda_ot // v
    if v > 2:
        try:
            assert sp.bound_multi_ot(ideal, v - 1) > ideal.target_delta
        except DomainError:
            pass


def test_multi_ot_bound_monotone_in_v(ideal):
    vs = np.linspace(2 ** 16, ideal.lambda_ot, 20).astype(int)
    vals = [sp.bound_multi_ot(ideal, int(v)) for v in vs]
    assert np.all(np.diff(vals) <= 0)


def test_competitor_numbers():
    t0 = time.perf_counter()
    b = sp.bench_bckm21()
    assert abs(b.n_bb84 / 2.27e13 - 1) < 0.05
    a3, a4 = sp.bench_abkk23(rounds=3), sp.bench_abkk23(rounds=4)
    assert abs(a3.n_bb84 / 3.22e6 - 1) < 0.01
    assert abs(a4.n_bb84 / 1.43e6 - 1) < 0.01
    assert time.perf_counter() - t0 < 30
    with pytest.raises(ValueError):
        sp.bench_abkk23(rounds=5)


def test_toy_report_is_flagged_insecure():
    r = sp.params_report(SecurityParams.toy(512))
    assert r["secure"] is False
    assert r["n_bb84"] == 2 * 512 + 4 * r["params"]["lambda_ex"]


def test_human_duration():
    assert sp.human_duration(33.3) == "33.3 s"
    assert sp.human_duration(3 * 3600) == "3 h"
    assert "months" in sp.human_duration(2.27e7 * 86400 / 86400 * 1e1)


def test_optimizer_rejects_bad_target():
    with pytest.raises(ValueError):
        sp.optimize_params(target=0)
    with pytest.raises(DomainError):
        sp.optimize_params(alpha=0.6)
