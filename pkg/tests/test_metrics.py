import numpy as np
import pytest
from hypothesis import given, strategies as st

from bdboost.linalg import InvalidInputError
from bdboost.metrics import (check_covariances, covariance_to_precoder, effective_rank,
                             leakage_norm, per_bs_power, per_bs_powers, snr_boost_db, sum_rate,
                             user_rate, user_rates)
from bdboost.network import NetworkConfig, sample_channels
from conftest import random_psd


def _direct_rate(H, S, k):
    # textbook form: log det(I + (I + interference)^{-1} signal)
    eye = np.eye(H.shape[1])
    Rn = eye + sum(H[k] @ S[i] @ H[k].conj().T for i in range(len(S)) if i != k)
    Sig = H[k] @ S[k] @ H[k].conj().T
    return np.linalg.slogdet(eye + np.linalg.solve(Rn, Sig))[1]


@given(st.integers(0, 10_000))
def test_rates_match_direct_formula(seed):
    rng = np.random.default_rng(seed)
    cfg = NetworkConfig(3, 2, 3, 2)
    ch = sample_channels(cfg, seed)
    S = np.stack([random_psd(rng, 6, rank=2) for _ in range(3)])
    r = user_rates(ch, S)
    assert np.all(r >= 0)
    for k in range(3):
        assert r[k] == pytest.approx(_direct_rate(ch.H, S, k), abs=1e-9)
    assert sum_rate(ch, S, bits=True) == pytest.approx(r.sum() / np.log(2))
    assert user_rate(ch, S, 1) == pytest.approx(r[1])


def test_zero_covariance_zero_rate(ch):
    assert sum_rate(ch, np.zeros((3, 6, 6))) == 0.0


def test_single_user_capacity_formula():
    H = np.array([[[2.0, 0.0]]])
    S = np.array([[[1.5, 0.0], [0.0, 0.0]]])
    assert user_rates(H, S)[0] == pytest.approx(np.log(1 + 4 * 1.5))


def test_powers(cfg, rng):
    S = np.stack([random_psd(rng, 6) for _ in range(3)])
    p = per_bs_powers(cfg, S)
    diag = np.real(np.einsum("kii->i", S))
    np.testing.assert_allclose(p, diag.reshape(3, 2).sum(axis=1))
    assert per_bs_power(cfg, S, 2) == pytest.approx(p[2])
    with pytest.raises(IndexError):
        per_bs_power(cfg, S, 3)


def test_leakage_zero_for_separated_users():
    H = np.array([[[1.0, 0.0]], [[0.0, 1.0]]], dtype=complex)
    S = np.array([np.diag([1.0, 0.0]), np.diag([0.0, 3.0])], dtype=complex)
    assert leakage_norm(H, S) == 0.0
    S[0] = np.eye(2)
    assert leakage_norm(H, S) == pytest.approx(1.0 / (1.0 + np.sqrt(2.0)))


def test_effective_rank(rng):
    assert effective_rank(random_psd(rng, 5, rank=2)) == 2
    assert effective_rank(np.zeros((3, 3))) == 0
    assert effective_rank(np.diag([1.0, 1e-9])) == 1


def test_snr_boost():
    assert snr_boost_db(0.1) == pytest.approx(10.0)
    assert snr_boost_db(1.0) == 0.0
    with pytest.raises(InvalidInputError):
        snr_boost_db(0.0)


def test_check_covariances(rng):
    good = np.stack([random_psd(rng, 4, rank=2)])
    check_covariances(good, max_rank=2)
    with pytest.raises(InvalidInputError):
        check_covariances(good, max_rank=1)
    with pytest.raises(InvalidInputError):
        check_covariances(-good)
    with pytest.raises(InvalidInputError):
        check_covariances(np.zeros((2, 3)))


def test_precoder_factorization(rng):
    S = random_psd(rng, 5, rank=2)
    W = covariance_to_precoder(S, 2)
    np.testing.assert_allclose(W @ W.conj().T, S, atol=1e-10)
    with pytest.raises(InvalidInputError):
        covariance_to_precoder(S, 1)
