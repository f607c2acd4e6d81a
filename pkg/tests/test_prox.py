import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from imopt.errors import ConfigError, DomainError, InvalidArgument, UnsupportedSet
from imopt.prox import (
    ENTROPY,
    EUCLIDEAN,
    InexactnessBudget,
    ProxSetup,
    accuracy_translate,
    bregman,
    linear_prox,
    linear_prox_residual,
    max_bregman,
    verify_inexact_stationarity,
)
from imopt.sets import Box, EuclideanBall, ProductOfSimplices, Simplex, WholeSpace, parse_set, project_simplex


def test_euclidean_bregman_closed_form():
    assert bregman(EUCLIDEAN, [0.0, 0.0], [3.0, 4.0]) == pytest.approx(12.5)


def test_entropy_bregman_values():
    assert bregman(ENTROPY, [0.5, 0.5], [0.5, 0.5]) == 0.0
    # 0.9 ln 1.8 + 0.1 ln 0.2 evaluated by hand
    assert bregman(ENTROPY, [0.5, 0.5], [0.9, 0.1]) == pytest.approx(0.368064, abs=1e-6)


def test_entropy_rejects_negative():
    with pytest.raises(DomainError):
        bregman(ENTROPY, [0.5, 0.5], [1.5, -0.5])


def test_accuracy_translate_examples():
    assert accuracy_translate(0.0, 2.0, 1.0, 1.0) == 0.0
    assert accuracy_translate(2.0, 2.0, 1.0, 1.0) == pytest.approx(math.sqrt(2.0))
    assert accuracy_translate(1.0, 1.0, 2.0, 1.0, grad_zero_at_opt=True) == pytest.approx(2.0)
    with pytest.raises(InvalidArgument):
        accuracy_translate(1.0, 0.0, 1.0, 1.0)


def test_stationarity_examples():
    S = Simplex(2)
    h = np.array([1.0, 0.0])
    assert verify_inexact_stationarity(lambda x: h, [0.0, 1.0], S, 0.0)
    assert not verify_inexact_stationarity(lambda x: h, [1.0, 0.0], S, 0.5)
    box = Box(-1.0, 1.0, 2)
    assert verify_inexact_stationarity(lambda x: np.zeros(2), [0.2, -0.3], box, 0.0)
    with pytest.raises(UnsupportedSet):
        verify_inexact_stationarity(lambda x: h, [0.0, 0.0], WholeSpace(2), 0.0)


def test_entropy_prox_step_is_softmax():
    x = linear_prox([1.0, 0.0], [0.5, 0.5], 1.0, ENTROPY, Simplex(2))
    e = math.e
    assert x == pytest.approx([1 / (1 + e), e / (1 + e)])
    assert x == pytest.approx([0.2689, 0.7311], abs=1e-4)


def test_euclidean_prox_step_is_gradient_step():
    x = linear_prox([1.0, 0.0], [1.0, 0.0], 1.0, EUCLIDEAN, WholeSpace(2))
    assert x == pytest.approx([0.0, 0.0])


def test_linear_prox_residual_zero_at_exact_solution():
    rng = np.random.default_rng(0)
    for Q, setup in ((Box(-1, 1, 5), EUCLIDEAN), (Simplex(5), ENTROPY), (EuclideanBall(np.zeros(5), 1.0), EUCLIDEAN)):
        z = Q.sample(rng, 1)[0]
        g = rng.standard_normal(5)
        x = linear_prox(g, z, 0.7, setup, Q)
        assert linear_prox_residual(g, x, z, 0.7, setup, Q) <= 1e-9


def test_max_bregman_box_and_simplex():
    assert max_bregman(EUCLIDEAN, np.zeros(3), Box(-1, 1, 3)) == pytest.approx(1.5)
    assert max_bregman(ENTROPY, np.full(4, 0.25), Simplex(4)) == pytest.approx(math.log(4))
    Q = ProductOfSimplices(2, 3)
    z = np.concatenate([np.full(2, 0.5), np.full(3, 1 / 3)])
    assert max_bregman(ENTROPY, z, Q) == pytest.approx(math.log(2) + math.log(3))


def test_scaled_setup_radius():
    s = EUCLIDEAN.scaled([1.0, 0.0], 2.0)
    assert s.bregman([1.0, 0.0], [3.0, 0.0]) == pytest.approx(0.5)
    assert not s.is_one_strongly_convex
    with pytest.raises(Exception):
        ENTROPY.scaled([0.5, 0.5], 1.0)


def test_budget_validation():
    with pytest.raises(InvalidArgument):
        InexactnessBudget(delta=-1.0)
    b = InexactnessBudget(delta=0.1, delta_schedule=lambda k, a, A: a / A)
    assert b.delta_at(0, 1.0, 2.0) == pytest.approx(0.6)


def test_parse_set_forms():
    assert isinstance(parse_set("simplex:5"), Simplex)
    box = parse_set("box:[-1,1]^10")
    assert box.dim == 10 and box.lower[0] == -1.0
    ball = parse_set("ball:0,1.0", n=3)
    assert ball.dim == 3 and ball.radius == 1.0
    assert parse_set("simplices:2,3").dim == 5
    with pytest.raises(ConfigError):
        parse_set("sphere:3")
    with pytest.raises(ConfigError):
        parse_set("ball:0,1.0")


def test_setup_rejects_unknown_kind():
    with pytest.raises(InvalidArgument):
        ProxSetup("hellinger")


# ---------------------------------------------------------------- properties

simplex_points = arrays(np.float64, 4, elements=st.floats(1e-3, 1.0)).map(lambda v: v / v.sum())
real_points = arrays(np.float64, 4, elements=st.floats(-10, 10))


@settings(max_examples=200, deadline=None)
@given(simplex_points, simplex_points)
def test_entropy_bregman_nonnegative_and_pinsker(y, x):
    v = bregman(ENTROPY, y, x)
    assert v >= 0.0
    assert v >= 0.5 * float(np.abs(x - y).sum()) ** 2 - 1e-12


@settings(max_examples=200, deadline=None)
@given(simplex_points, simplex_points, simplex_points)
def test_three_point_identity_entropy(x, y, z):
    # V[z](x) = V[y](x) + V[z](y) + <grad d(y) - grad d(z), x - y>
    lhs = bregman(ENTROPY, z, x)
    rhs = bregman(ENTROPY, y, x) + bregman(ENTROPY, z, y) + float((ENTROPY.grad(y) - ENTROPY.grad(z)) @ (x - y))
    assert lhs == pytest.approx(rhs, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(real_points, real_points, real_points)
def test_three_point_identity_euclidean(x, y, z):
    lhs = bregman(EUCLIDEAN, z, x)
    rhs = bregman(EUCLIDEAN, y, x) + bregman(EUCLIDEAN, z, y) + float((y - z) @ (x - y))
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, 6, elements=st.floats(-5, 5)))
def test_simplex_projection_feasible_and_optimal(v):
    p = project_simplex(v)
    assert Simplex(6).contains(p)
    # optimality: <v - p, q - p> <= 0 at every vertex q
    for q in np.eye(6):
        assert float((v - p) @ (q - p)) <= 1e-9
