import numpy as np
import pytest

from imopt.errors import InvalidArgument, UnsupportedCombination
from imopt.models import MinModelAsVI, check_min_model_is_vi_model, validate_min_model, validate_vi_model
from imopt.prox import ENTROPY, EUCLIDEAN
from imopt.sets import Box, EuclideanBall, Simplex, WholeSpace
from imopt.zoo import (
    CompositeProblem,
    HolderProblem,
    InexactProx,
    L1Norm,
    LinearFunction,
    MinMin,
    ShiftedModel,
    SuperpositionProblem,
    composite_prox,
    holder_L,
    holder_vi_L,
    make_composite_model,
    make_inexact_linearization_model,
    make_proximal_model,
    make_smooth_model,
    make_superposition_model,
    make_universal_model,
    make_vi_operator_model,
)

BOX = Box(-2.0, 2.0, 3)


def half_sq():
    return make_smooth_model(lambda x: 0.5 * float(x @ x), lambda x: x.copy(), 1.0)


def test_smooth_quadratic_passes():
    assert validate_min_model(half_sq(), EUCLIDEAN, BOX).passed


def test_composite_passes():
    p = CompositeProblem(lambda x: 0.5 * float(x @ x), lambda x: x.copy(), L1Norm(1.0))
    assert validate_min_model(make_composite_model(p, 1.0), EUCLIDEAN, BOX).passed


def test_too_small_L_fails_upper():
    m = make_smooth_model(lambda x: 0.5 * float(x @ x), lambda x: x.copy(), 0.5)
    rep = validate_min_model(m, EUCLIDEAN, BOX)
    assert not rep.passed
    assert rep.max_upper_violation > 0
    assert rep.max_lower_violation == 0


def test_validator_needs_L():
    m = half_sq()
    m.L = None
    with pytest.raises(InvalidArgument):
        validate_min_model(m, EUCLIDEAN, BOX)


def test_shifted_model_needs_its_delta():
    m = ShiftedModel(half_sq(), 0.1)
    assert validate_min_model(m, EUCLIDEAN, BOX).passed
    assert not validate_min_model(m, EUCLIDEAN, BOX, delta=0.0).passed


def test_vi_monotone_lipschitz_passes():
    ball = EuclideanBall(np.zeros(2), 1.0)
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    m = make_vi_operator_model(lambda x: rot @ x, L=1.0)
    rep = validate_vi_model(m, EUCLIDEAN, ball)
    assert rep.passed
    ident = make_vi_operator_model(lambda x: x.copy(), L=1.0)
    assert validate_vi_model(ident, EUCLIDEAN, ball).passed


def test_vi_too_small_L_fails():
    ball = EuclideanBall(np.zeros(2), 1.0)
    rot = 3.0 * np.array([[0.0, -1.0], [1.0, 0.0]])
    rep = validate_vi_model(make_vi_operator_model(lambda x: rot @ x, L=1.0), EUCLIDEAN, ball)
    assert not rep.passed and rep.counts["smoothness"] > 0


def test_min_model_is_vi_model():
    assert check_min_model_is_vi_model(half_sq(), EUCLIDEAN, BOX, n_samples=300)
    p = CompositeProblem(lambda x: 0.5 * float(x @ x), lambda x: x.copy(), L1Norm(1.0))
    assert check_min_model_is_vi_model(make_composite_model(p, 1.0), EUCLIDEAN, BOX, n_samples=300)


def test_min_min_model_as_vi_with_five_delta():
    rng = np.random.default_rng(0)
    J = rng.standard_normal((5, 5))
    J = J @ J.T + np.eye(5)
    Ax, G, H = J[:3, :3], J[3:, :3], J[3:, 3:]
    inner = MinMin(
        lambda z, x: 0.5 * float(x @ Ax @ x) + float(z @ G @ x) + 0.5 * float(z @ H @ z),
        lambda z, x: Ax @ x + G.T @ z,
        lambda z, x: G @ x + H @ z,
        Box(-0.3, 0.3, 2),
        float(np.linalg.eigvalsh(J)[-1]),
        L_z=float(np.linalg.eigvalsh(H)[-1]),
    )
    m = make_inexact_linearization_model(inner, 1e-3)
    assert validate_min_model(m, EUCLIDEAN, BOX, n_samples=300).passed
    assert check_min_model_is_vi_model(m, EUCLIDEAN, BOX, n_samples=300)


def test_min_model_as_vi_prox_scaling():
    vi = MinModelAsVI(half_sq())
    x, r = vi.prox(np.ones(3), np.ones(3), 2.0, EUCLIDEAN, WholeSpace(3))
    assert x == pytest.approx(0.5 * np.ones(3))
    assert r == 0.0


def test_composite_prox_example_against_grid():
    # g = 1/2 ||x||^2, h = ||x||_1, y = z = (2, 0), alpha = 1
    y = z = np.array([2.0, 0.0])
    x = composite_prox(y, L1Norm(1.0), z, 1.0, EUCLIDEAN, WholeSpace(2))
    grid = np.linspace(-3, 3, 60001)
    for i in range(2):
        obj = y[i] * grid + np.abs(grid) + 0.5 * (grid - z[i]) ** 2
        assert x[i] == pytest.approx(grid[np.argmin(obj)], abs=1e-4)
    assert x == pytest.approx([0.0, 0.0])


@pytest.mark.parametrize("lam,t", [(0.3, 1.0), (1.0, 0.5), (2.0, 0.25)])
def test_soft_threshold_against_grid(lam, t):
    rng = np.random.default_rng(1)
    v = rng.uniform(-2, 2, 5)
    x = L1Norm(lam).prox(v, t, WholeSpace(5))
    grid = np.linspace(-3, 3, 60001)
    for i in range(5):
        obj = t * lam * np.abs(grid) + 0.5 * (grid - v[i]) ** 2
        assert x[i] == pytest.approx(grid[np.argmin(obj)], abs=1e-4)


def test_entropy_with_l1_not_supported_off_simplex():
    with pytest.raises(UnsupportedCombination):
        composite_prox(np.ones(3), L1Norm(1.0), np.full(3, 1 / 3), 1.0, ENTROPY, Box(0, 1, 3))


def test_proximal_model_linear_is_gradient_step():
    m = make_proximal_model(LinearFunction(np.array([1.0, -1.0])), 1.0)
    x, r = m.prox(None, np.zeros(2), 0.5, EUCLIDEAN, WholeSpace(2))
    assert x == pytest.approx([-0.5, 0.5]) and r == 0.0
    with pytest.raises(InvalidArgument):
        make_proximal_model(lambda x: 0.0, 1.0)


def test_superposition_prox_is_optimal():
    a = np.array([1.0, 0.0])
    p = SuperpositionProblem(
        [lambda x: 0.5 * float(x @ x), lambda x: 0.5 * float((x - a) @ (x - a)) + 0.1],
        [lambda x: x.copy(), lambda x: x - a],
        [1.0, 1.0],
    )
    m = make_superposition_model(p)
    y = np.array([0.3, -0.2])
    z = np.array([0.5, 0.5])
    x, _ = m.prox(y, z, 0.7, EUCLIDEAN, WholeSpace(2))

    def obj(u):
        return 0.7 * m.psi(u, y) + 0.5 * float((u - z) @ (u - z))

    rng = np.random.default_rng(0)
    base = obj(x)
    for _ in range(500):
        assert obj(x + 1e-3 * rng.standard_normal(2)) >= base - 1e-12
    with pytest.raises(UnsupportedCombination):
        m.prox(y, z, 0.7, EUCLIDEAN, Box(-1, 1, 2))


def test_holder_L_values():
    assert holder_L(1.0, 3.0, 0.123) == pytest.approx(3.0)
    assert holder_L(0.0, 1.0, 0.5) == pytest.approx(1.0)
    assert holder_L(0.0, 2.0, 1.0) == pytest.approx(2.0)
    assert holder_vi_L(1.0, 3.0, 0.5) == pytest.approx(3.0)
    assert holder_vi_L(0.0, 1.0, 0.5) == pytest.approx(1.0)
    with pytest.raises(InvalidArgument):
        holder_L(1.5, 1.0, 0.1)


def test_universal_model_uses_L_of_delta():
    p = HolderProblem(lambda x: float(np.abs(x).sum()), np.sign, 0.0, 2.0)
    m = make_universal_model(p, 0.25)
    assert m.L == pytest.approx(holder_L(0.0, 2.0, 0.25))
    assert validate_min_model(m, EUCLIDEAN, BOX).passed


@pytest.mark.parametrize("kind", ["box", "simplex", "composite"])
def test_inexact_prox_hits_requested_residual(kind):
    rng = np.random.default_rng(2)
    if kind == "simplex":
        Q, setup = Simplex(6), ENTROPY
        base = make_smooth_model(lambda x: 0.5 * float(x @ x), lambda x: x.copy(), 1.0)
    else:
        Q, setup = Box(-1.0, 1.0, 6), EUCLIDEAN
        if kind == "box":
            base = make_smooth_model(lambda x: 0.5 * float(x @ x), lambda x: x.copy(), 1.0)
        else:
            base = make_composite_model(CompositeProblem(lambda x: 0.5 * float(x @ x), lambda x: x.copy(), L1Norm(0.5)), 1.0)
    m = InexactProx(base, seed=4)
    for _ in range(20):
        y, z = Q.sample(rng, 2)
        x, r = m.prox(y, z, 0.5, setup, Q, 1e-3)
        assert Q.contains(x)
        assert r == pytest.approx(m.prox_residual(x, y, z, 0.5, setup, Q))
        assert 0.25e-3 <= r <= 1e-3 + 1e-15
