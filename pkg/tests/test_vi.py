import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imopt.errors import GapOracleUnavailable, InvalidArgument, UnsupportedCombination
from imopt.prox import ENTROPY, EUCLIDEAN
from imopt.sets import Box, EuclideanBall, Product, ProductOfSimplices, Simplex
from imopt.vi import (
    bilinear_duality_gap,
    key_inequality_excess,
    min_linear_plus,
    mirror_prox_rate_bound,
    mirror_prox_restart_solve,
    mirror_prox_solve,
    mirror_prox_universal_solve,
    mp_restart_iteration_bound,
    mp_restart_stages,
    saddle_solve,
    universal_mp_iteration_bound,
    vertex_gap,
)
from imopt.zoo import L1Norm, LinearFunction, SquaredNorm, bilinear_saddle, make_composite_saddle_vi_model, make_vi_operator_model

PENNIES = np.array([[1.0, -1.0], [-1.0, 1.0]])


def test_matching_pennies_equilibrium():
    res = saddle_solve(bilinear_saddle(PENNIES), ProductOfSimplices(2, 2), ENTROPY, 1e-4, L=1.0)
    assert res.u_hat == pytest.approx([0.5, 0.5], abs=1e-6)
    assert res.v_hat == pytest.approx([0.5, 0.5], abs=1e-6)
    assert res.gap <= 1e-4


def test_large_eps_single_iteration():
    m = make_vi_operator_model(lambda x: x.copy(), L=1.0)
    run = mirror_prox_solve(m, EUCLIDEAN, EuclideanBall(np.zeros(2), 1.0), eps=1e6)
    assert run.N == 1 and run.stop_reason == "S_target"


def test_degenerate_game_gap_is_linear_residual():
    # u lives in a one-point simplex, so the gap is max_v <A'u, v> - <A'u, v_hat>
    A = np.array([[0.3, -0.2, 0.7]])
    Q = ProductOfSimplices(1, 3)
    sf = bilinear_saddle(A)
    v = np.array([0.2, 0.5, 0.3])
    c = A[0]
    assert bilinear_duality_gap(sf, Q, np.array([1.0]), v) == pytest.approx(c.max() - c @ v)


def test_gap_bounded_by_certificate_random_game():
    rng = np.random.default_rng(3)
    A = rng.uniform(-1, 1, (3, 4))
    L = float(np.abs(A).max())
    res = saddle_solve(bilinear_saddle(A), ProductOfSimplices(3, 4), ENTROPY, 1e-2, L=L)
    for k, gap, cert in res.gaps:
        assert gap <= cert + 1e-9
        assert gap <= mirror_prox_rate_bound(L, res.run.meta["V_max"], k) + 1e-9
    assert res.gap <= res.bound + 1e-9


def test_composite_saddle_with_l1_on_box():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((3, 3))
    sf = bilinear_saddle(A, h=L1Norm(0.2), phi=SquaredNorm(1.0))
    Q = Product(Box(-1, 1, 3), Box(-1, 1, 3))
    L = float(np.linalg.norm(A, 2))
    res = saddle_solve(sf, Q, EUCLIDEAN, 1e-3, L=L)
    assert res.gap <= 1e-3 + 1e-9
    assert all(g <= c + 1e-9 for _, g, c in res.gaps)


def test_min_linear_plus_against_vertices():
    rng = np.random.default_rng(0)
    c = rng.standard_normal(4)
    S = Simplex(4)
    assert min_linear_plus(c, LinearFunction(np.ones(4)), S) == pytest.approx(c.min() + 1.0)
    box = Box(-1, 1, 4)
    grid = np.linspace(-1, 1, 2001)
    expect = sum(min(ci * grid + 0.5 * np.abs(grid)) for ci in c)
    assert min_linear_plus(c, L1Norm(0.5), box) == pytest.approx(expect, abs=1e-9)
    with pytest.raises(GapOracleUnavailable):
        min_linear_plus(c, SquaredNorm(1.0), S)


def test_vertex_gap_matches_duality_gap_for_games():
    rng = np.random.default_rng(5)
    A = rng.uniform(-1, 1, (2, 3))
    Q = ProductOfSimplices(2, 3)
    sf = bilinear_saddle(A)
    m = make_composite_saddle_vi_model(sf, 1.0)
    w = Q.sample(rng, 1)[0]
    assert vertex_gap(m, w, Q.vertices()) == pytest.approx(bilinear_duality_gap(sf, Q, *sf.split(w)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_key_inequality_holds_everywhere(seed):
    rng = np.random.default_rng(seed)
    A = rng.uniform(-1, 1, (3, 3))
    Q = ProductOfSimplices(3, 3)
    m = make_composite_saddle_vi_model(bilinear_saddle(A), float(np.abs(A).max()))
    run = mirror_prox_solve(m, ENTROPY, Q, 1e-2, max_iter=50)
    for u in Q.sample(rng, 5):
        assert key_inequality_excess(m, ENTROPY, run, u).max() <= 1e-9


def test_key_inequality_needs_iterates():
    m = make_vi_operator_model(lambda x: x.copy(), L=1.0)
    run = mirror_prox_solve(m, EUCLIDEAN, EuclideanBall(np.zeros(2), 1.0), 1e-2, keep_iterates=False)
    with pytest.raises(InvalidArgument):
        key_inequality_excess(m, EUCLIDEAN, run, np.zeros(2))


def test_universal_bound_and_guarantee():
    g = lambda x: (x - 0.2) / max(float(np.linalg.norm(x - 0.2)), 1e-300)  # noqa: E731
    m = make_vi_operator_model(g, L=1.0)
    run = mirror_prox_universal_solve(m, EUCLIDEAN, EuclideanBall(np.zeros(2), 1.0), 0.05, holder=[(0.0, 2.0)])
    assert run.N <= run.meta["iteration_bound"]
    assert run.records[-1].cert <= 2 * 0.05 + 1e-12
    assert universal_mp_iteration_bound(1.0, 1.0, [(1.0, 1.0)]) == 4


def test_restart_stage_counts():
    assert mp_restart_stages(1.0, 4.0) == 0
    assert mp_restart_stages(1.0, 2.0) == 0
    assert mp_restart_stages(1.0, 1.0) == 1
    assert mp_restart_iteration_bound(1.0, 1.0, 1.0, 1.0, 2.0) == 0
    assert mp_restart_iteration_bound(2.0, 1.0, 1.0, 1.0, 0.25) == math.ceil(4 * 3)


def test_restart_zero_stages_returns_x0():
    m = make_vi_operator_model(lambda x: x.copy(), L=1.0, mu=1.0)
    x0 = np.array([0.1, 0.2])
    run = mirror_prox_restart_solve(m, EUCLIDEAN, EuclideanBall(np.zeros(2), 1.0), x0, 0.05, 1.0)
    assert run.N == 0 and run.stop_reason == "no_stages"
    assert run.x_last == pytest.approx(x0)


def test_restart_contracts_distance():
    rng = np.random.default_rng(7)
    K = rng.standard_normal((4, 4))
    M = np.eye(4) + K - K.T
    a = np.array([0.1, -0.2, 0.05, 0.3])
    m = make_vi_operator_model(lambda x: M @ (x - a), L=float(np.linalg.norm(M, 2)), mu=1.0)
    B = EuclideanBall(np.zeros(4), 1.0)
    x0 = B.project(np.ones(4))
    R0 = float((x0 - a) @ (x0 - a))
    run = mirror_prox_restart_solve(m, EUCLIDEAN, B, x0, R0, 1e-5, x_star=a)
    assert float((run.x_last - a) @ (run.x_last - a)) <= 1e-5
    assert run.N <= mp_restart_iteration_bound(m.L, 1.0, 1.0, R0, 1e-5)
    for s in run.stages:
        assert s["dist2"] <= s["R2_next"]


def test_restart_rejects_entropy_and_missing_mu():
    m = make_vi_operator_model(lambda x: x.copy(), L=1.0)
    B = EuclideanBall(np.zeros(2), 1.0)
    with pytest.raises(InvalidArgument):
        mirror_prox_restart_solve(m, EUCLIDEAN, B, np.zeros(2), 1.0, 1e-3)
    m.mu = 1.0
    with pytest.raises(UnsupportedCombination):
        mirror_prox_restart_solve(m, ENTROPY, Simplex(2), np.full(2, 0.5), 1.0, 1e-3, Omega=1.0)
