import numpy as np
import pytest
from hypothesis import given, strategies as st

from bdboost import ellipsoid as el
from bdboost.linalg import InvalidInputError


def quadratic_oracle(c):
    def oracle(x):
        return el.Cut(el.OBJECTIVE, 2 * (x - c), float(np.sum((x - c) ** 2)))
    return oracle


def test_unconstrained_quadratic():
    c = np.array([0.3, -0.7, 1.1])
    res = el.minimize(quadratic_oracle(c), np.zeros(3), 5.0, stop_tol=1e-8)
    assert res.converged
    assert res.f_best <= 1e-8
    np.testing.assert_allclose(res.x_best, c, atol=1e-4)


def test_constrained_one_dimensional():
    # minimize x subject to x >= 2
    def oracle(x):
        if x[0] < 2.0:
            return el.Cut(el.FEASIBILITY, np.array([-1.0]))
        return el.Cut(el.OBJECTIVE, np.array([1.0]), float(x[0]))
    res = el.minimize(oracle, [10.0], 20.0, stop_tol=1e-9)
    assert res.f_best == pytest.approx(2.0, abs=1e-8)


def test_infeasible_raises():
    def oracle(x):
        return el.Cut(el.FEASIBILITY, np.ones_like(x))
    with pytest.raises(el.InfeasibleError) as info:
        el.minimize(oracle, np.zeros(2), 1.0, max_iter=20)
    assert len(info.value.trace) == 20


def test_iteration_cap_reports_not_converged():
    res = el.minimize(quadratic_oracle(np.ones(2)), np.zeros(2), 5.0, stop_tol=1e-12, max_iter=5)
    assert not res.converged and res.iterations == 5


def test_zero_subgradient_stops():
    res = el.minimize(quadratic_oracle(np.zeros(2)), np.zeros(2), 1.0)
    assert res.converged and res.iterations == 1


@given(st.integers(2, 6), st.integers(0, 10_000))
def test_cut_keeps_halfspace_and_shrinks_volume(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    st0 = el.EllipsoidState(x=rng.standard_normal(n), E=A @ A.T + 0.1 * np.eye(n), iteration=0)
    g = rng.standard_normal(n)
    st1 = el.cut_update(st0, g)
    ratio = np.sqrt(np.linalg.det(st1.E) / np.linalg.det(st0.E))
    assert ratio < np.exp(-1.0 / (2 * (n + 1))) + 1e-12
    # points of the old ellipsoid in the kept half lie in the new one
    L = np.linalg.cholesky(st0.E)
    Einv = np.linalg.inv(st1.E)
    for _ in range(50):
        u = rng.standard_normal(n)
        y = st0.x + L @ (u / np.linalg.norm(u) * rng.uniform() ** (1 / n))
        if g @ (y - st0.x) <= 0:
            assert (y - st1.x) @ Einv @ (y - st1.x) <= 1 + 1e-9


def test_one_dimensional_cut_halves():
    st0 = el.init_ellipsoid([0.0], 2.0)
    st1 = el.cut_update(st0, [1.0])
    assert st1.x[0] == pytest.approx(-1.0)
    assert st1.E[0, 0] == pytest.approx(1.0)


def test_width():
    st0 = el.init_ellipsoid(np.zeros(2), [1.0, 3.0])
    assert st0.width(np.array([0.0, 1.0])) == pytest.approx(3.0)


@pytest.mark.parametrize("g", [[0.0, 0.0], [np.nan, 1.0], [1.0]])
def test_bad_cut_rejected(g):
    with pytest.raises(InvalidInputError):
        el.cut_update(el.init_ellipsoid(np.zeros(2), 1.0), g)


def test_bad_radius():
    with pytest.raises(InvalidInputError):
        el.init_ellipsoid(np.zeros(2), -1.0)
