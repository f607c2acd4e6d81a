import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from imopt.errors import ConfigError, InvalidArgument, MaxIterExceeded, ScaleError
from imopt.ot import (
    OTInstance,
    exact_ot_oracle,
    format_instance,
    kl_divergence,
    load_instance,
    marginal_residual,
    parse_instance,
    plain_sinkhorn,
    proximal_sinkhorn,
    proximal_sinkhorn_doubling,
    random_instance,
    round_to_polytope,
    save_instance,
    sinkhorn,
)

SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])
HALF = np.array([0.5, 0.5])


def lp_cost(inst):
    n = inst.n
    A_eq = np.vstack([np.kron(np.eye(n), np.ones(n)), np.kron(np.ones(n), np.eye(n))])
    res = linprog(inst.C.ravel(), A_eq=A_eq, b_eq=np.concatenate([inst.l, inst.w]), bounds=(0, None), method="highs")
    return res.fun


def test_exact_oracle_examples():
    assert exact_ot_oracle(OTInstance([[0.7]], [1.0], [1.0])) == pytest.approx(0.7)
    assert exact_ot_oracle(OTInstance(SWAP, HALF, HALF)) == 0.0
    assert exact_ot_oracle(OTInstance(SWAP, [1.0, 0.0], [0.0, 1.0])) == 1.0


@pytest.mark.parametrize("seed", range(12))
def test_exact_oracle_matches_linprog(seed):
    inst = random_instance(2 + seed % 6, seed)
    value, plan = exact_ot_oracle(inst, return_plan=True)
    assert value == pytest.approx(lp_cost(inst), abs=1e-12)
    assert marginal_residual(plan, inst.l, inst.w) <= 1e-12


def test_exact_oracle_scale_error():
    inst = OTInstance(SWAP, [0.3333, 0.6667], HALF)
    with pytest.raises(ScaleError):
        exact_ot_oracle(inst, scale=1000)
    assert exact_ot_oracle(inst, scale=10000) == pytest.approx(lp_cost(inst))


def test_sinkhorn_small_gamma_is_diagonal():
    sk = sinkhorn(OTInstance(SWAP, HALF, HALF), 1e-3)
    assert sk.log_domain
    assert sk.plan == pytest.approx(0.5 * np.eye(2), abs=1e-9)


def test_sinkhorn_large_gamma_is_outer_product():
    inst = random_instance(4, 1)
    sk = sinkhorn(inst, 1e6)
    assert sk.plan == pytest.approx(np.outer(inst.l, inst.w), abs=1e-6)


def test_sinkhorn_log_and_plain_domains_agree():
    inst = random_instance(5, 2)
    a = sinkhorn(inst, 0.05, log_domain=False, tol=1e-12)
    b = sinkhorn(inst, 0.05, log_domain=True, tol=1e-12)
    assert a.plan == pytest.approx(b.plan, abs=1e-10)


def test_sinkhorn_strict_raises_with_result():
    with pytest.raises(MaxIterExceeded) as info:
        sinkhorn(random_instance(5, 3), 1e-3, tol=1e-15, max_iter=3)
    assert info.value.result.iterations == 3


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(1e-3, 10.0))
def test_sinkhorn_residual_monotone_and_plan_positive(seed, gamma):
    inst = random_instance(2 + seed % 5, seed)
    sk = sinkhorn(inst, gamma, tol=1e-10, max_iter=500, strict=False)
    assert np.all(np.diff(sk.residuals) <= 1e-12)
    assert sk.plan.min() > 0 or sk.log_domain


def test_rounding_cases():
    l = w = np.full(3, 1 / 3)
    assert round_to_polytope(np.zeros((3, 3)), l, w) == pytest.approx(np.outer(l, w))
    feasible = np.diag(l)
    assert round_to_polytope(feasible, l, w) == pytest.approx(feasible)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_rounding_feasible_and_close(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(2 + seed % 5, seed)
    base = exact_ot_oracle(inst, return_plan=True)[1]
    x = np.maximum(base + rng.normal(0, 0.02, base.shape), 0.0)
    r = marginal_residual(x, inst.l, inst.w)
    out = round_to_polytope(x, inst.l, inst.w)
    assert out.min() >= 0
    assert marginal_residual(out, inst.l, inst.w) <= 1e-12
    assert np.abs(out - x).sum() <= 2 * r + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_kl_nonnegative(seed):
    rng = np.random.default_rng(seed)
    x, y = rng.uniform(0, 1, (2, 3, 3))
    x[0, 0] = 0.0
    assert kl_divergence(x, y) >= 0.0
    assert kl_divergence(y, y) == pytest.approx(0.0, abs=1e-15)


def test_proximal_sinkhorn_matches_exact_and_descends():
    for seed in range(10):
        inst = random_instance(3 + seed % 4, 100 + seed)
        res = proximal_sinkhorn(inst, 1.0, 1e-3)
        assert abs(res.cost - exact_ot_oracle(inst)) <= 1e-3
        assert marginal_residual(res.plan, inst.l, inst.w) <= 1e-12
        slack = 2 * inst.C.max() * res.run.meta["inner_tol"]
        assert max(res.descent_excess) <= slack


def test_proximal_sinkhorn_fixed_gamma_counts_outer_steps():
    inst = random_instance(3, 7)
    big = proximal_sinkhorn(inst, 10.0, 1e-2, adaptive=False)
    small = proximal_sinkhorn(inst, 1.0, 1e-2, adaptive=False)
    # with a fixed gamma the certificate ln n * gamma / N needs N ~ gamma / eps steps
    assert big.run.N > 5 * small.run.N
    assert big.run.records[-1].cert == pytest.approx(np.log(3) * 10.0 / big.run.N)


def test_doubling_variant_and_plain_sinkhorn():
    inst = random_instance(4, 11)
    exact = exact_ot_oracle(inst)
    res = proximal_sinkhorn_doubling(inst, 0.5, 1e-2)
    assert abs(res.cost - exact) <= 1e-2
    cost, sweeps = plain_sinkhorn(inst, 1e-2)
    assert abs(cost - exact) <= 1e-2 and sweeps >= 1


def test_instance_roundtrip(tmp_path):
    inst = random_instance(3, 5)
    path = tmp_path / "i.csv"
    save_instance(inst, path)
    back = load_instance(path)
    assert np.array_equal(back.C, inst.C) and np.array_equal(back.l, inst.l)
    assert format_instance(back) == format_instance(inst)


def test_instance_parse_errors():
    with pytest.raises(ConfigError):
        parse_instance("")
    with pytest.raises(ConfigError):
        parse_instance("n,2\n0,1\n1,0\nl:,0.5,0.5\n")
    with pytest.raises(ConfigError):
        parse_instance("n,2\n0,1\n1,0\nl:,0.5,0.6\nw:,0.5,0.5\n")
    with pytest.raises(InvalidArgument):
        OTInstance(-SWAP, HALF, HALF)
