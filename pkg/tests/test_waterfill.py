import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import brentq

from bdboost.linalg import NotPositiveDefiniteError
from bdboost.waterfill import water_fill, whitened_waterfill
from conftest import random_psd


def mode_oracle(level, sigma):
    """Root of d/dd [level ln(1 + sigma^2 d) - d], or 0 when the slope at 0 is negative."""
    slope = lambda d: level * sigma ** 2 / (1 + sigma ** 2 * d) - 1.0
    if slope(0.0) <= 0:
        return 0.0
    hi = 1.0
    while slope(hi) > 0:
        hi *= 2
    return brentq(slope, 0.0, hi, xtol=1e-14, rtol=1e-15)


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e2))
def test_water_fill_matches_numeric_oracle(level, sigma):
    assert water_fill(level, np.array([sigma]))[0] == pytest.approx(
        mode_oracle(level, sigma), abs=1e-8 * max(1.0, level))


def test_water_fill_zero_modes_get_nothing():
    d = water_fill(5.0, np.array([2.0, 0.0, 1e-14]))
    assert d[0] == pytest.approx(5.0 - 0.25)
    assert d[1] == 0.0 and d[2] == 0.0


def test_water_fill_batched_levels():
    d = water_fill(np.array([1.0, 2.0]), np.array([[1.0, 2.0], [1.0, 0.5]]))
    np.testing.assert_allclose(d, [[0.0, 0.75], [1.0, 0.0]])


def objective(H, A, w, S):
    eye = np.eye(H.shape[0])
    return w * np.linalg.slogdet(eye + H @ S @ H.conj().T)[1] - np.real(np.trace(A @ S))


@given(st.integers(0, 10_000), st.floats(0.1, 10.0))
def test_whitened_solution_beats_perturbations(seed, w):
    rng = np.random.default_rng(seed)
    H = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
    A = random_psd(rng, 4) + 0.2 * np.eye(4)
    res = whitened_waterfill(H[None], A[None], np.array([w]))
    S = res.S[0]
    best = objective(H, A, w, S)
    assert res.logdet[0] == pytest.approx(np.linalg.slogdet(np.eye(2) + H @ S @ H.conj().T)[1])
    assert res.cost[0] == pytest.approx(np.real(np.trace(A @ S)), abs=1e-9)
    for _ in range(30):
        D = random_psd(rng, 4, rank=rng.integers(1, 3), scale=10 ** rng.uniform(-4, 0))
        cand = S + D if rng.uniform() < 0.5 else (1 - rng.uniform(0, 0.5)) * S + D
        assert objective(H, A, w, cand) <= best + 1e-9 * (1 + abs(best))


def test_singular_cost_reports_user():
    H = np.ones((2, 1, 2), dtype=complex)
    A = np.stack([np.eye(2), np.diag([1.0, 0.0])])
    with pytest.raises(NotPositiveDefiniteError) as info:
        whitened_waterfill(H, A, np.ones(2))
    assert info.value.index == 1
