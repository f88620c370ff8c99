import cvxpy as cp
import numpy as np
import pytest

from bdboost.bd import (DegenerateChannelError, bd_objective, bd_solve, build_null_spaces)
from bdboost.metrics import leakage_norm, per_bs_powers, user_rates
from bdboost.network import NetworkConfig, sample_channels, selector_diagonals


def cvx_bd_rate(cfg, bd):
    """Independent solution of the BD sum-rate problem with a conic solver."""
    V, He = bd.ns.V, bd.ns.Heff
    K, _, nr = V.shape
    sel = selector_diagonals(cfg)
    Qs = [cp.Variable((nr, nr), hermitian=True) for _ in range(K)]
    obj = sum(cp.log_det(np.eye(nr) + He[k] @ Qs[k] @ He[k].conj().T) for k in range(K))
    cons = [Q >> 0 for Q in Qs]
    for j in range(cfg.num_bs):
        cons.append(sum(cp.real(cp.trace(V[k].conj().T @ np.diag(sel[j]) @ V[k] @ Qs[k]))
                        for k in range(K)) <= cfg.bs_power)
    prob = cp.Problem(cp.Maximize(obj), cons)
    prob.solve(solver="CLARABEL")
    return prob.value


def test_null_spaces(ch):
    ns = build_null_spaces(ch)
    assert ns.V.shape == (3, 6, 2)
    for k in range(3):
        for i in range(3):
            if i != k:
                assert np.linalg.norm(ch.H[i] @ ns.V[k]) < 1e-12
        np.testing.assert_allclose(ns.V[k].conj().T @ ns.V[k], np.eye(2), atol=1e-12)


def test_degenerate_channel_rejected():
    H = np.zeros((3, 1, 3), dtype=complex)
    H[0, 0, 0] = 1.0
    H[1, 0, 1] = H[2, 0, 1] = 1.0       # users 1 and 2 share one direction
    with pytest.raises(DegenerateChannelError):
        build_null_spaces(H)


@pytest.mark.parametrize("snr_db", [0.0, 10.0, 20.0])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_bd_matches_conic_solver(snr_db, seed):
    cfg = NetworkConfig.from_dims((3, 2, 3, 2), snr_db=snr_db)
    ch = sample_channels(cfg, seed)
    bd = bd_solve(cfg, ch)
    ref = cvx_bd_rate(cfg, bd)
    assert bd.sum_rate == pytest.approx(ref, rel=1e-6)


def test_bd_solution_structure(cfg, ch):
    bd = bd_solve(cfg, ch)
    assert leakage_norm(ch, bd.S) < 1e-10
    p = per_bs_powers(cfg, bd.S)
    assert np.all(p <= cfg.bs_power * (1 + 1e-9))
    assert p.max() == pytest.approx(cfg.bs_power, rel=1e-9)
    np.testing.assert_allclose(user_rates(ch, bd.S), bd.rates, atol=1e-9)
    assert bd_objective(bd.ns, bd.Q) == pytest.approx(bd.sum_rate, rel=1e-12)
    assert np.all(bd.mu >= 0)
    assert bd.duality_gap <= 1e-6 * (1 + bd.dual_value)


@pytest.mark.filterwarnings("ignore::UserWarning")
def test_bd_miso_is_zero_forcing():
    cfg = NetworkConfig.from_dims((2, 2, 4, 1), snr_db=10.0)
    ch = sample_channels(cfg, 3)
    bd = bd_solve(cfg, ch)
    G = ch.H[:, 0, :] @ bd.ns.V[:, :, 0].T
    off = G - np.diag(np.diag(G))
    assert np.abs(off).max() < 1e-12
    assert bd.sum_rate == pytest.approx(cvx_bd_rate(cfg, bd), rel=1e-6)


def test_bd_deterministic(cfg, ch):
    a, b = bd_solve(cfg, ch), bd_solve(cfg, ch)
    np.testing.assert_array_equal(a.S, b.S)
