import math

import numpy as np
import pytest

from imopt.errors import InvalidArgument, NotOneStronglyConvex, UnsupportedSet
from imopt.fgm import FGMConfig, fgm_restart_plan, fgm_restart_solve, fgm_solve, fgm_universal_solve, fw_solve
from imopt.gm import GMConfig, gm_certificate, gm_restart_solve, gm_restart_stages, gm_solve, gm_strongly_convex_solve
from imopt.models import StrongConvexityTag
from imopt.problems import composite_l1_box, quadratic_box, quadratic_simplex, quadratic_whole
from imopt.prox import EUCLIDEAN, InexactnessBudget
from imopt.sets import WholeSpace
from imopt.trace import TRACE_COLUMNS, read_trace, trace_csv, write_trace
from imopt.zoo import HolderProblem, InexactProx, ShiftedModel, make_universal_model


@pytest.fixture(scope="module")
def box_problem():
    return quadratic_box(8, seed=3, cond=30)


@pytest.mark.parametrize("solve,Cfg", [(gm_solve, GMConfig), (fgm_solve, FGMConfig)])
def test_start_at_minimizer_stays(solve, Cfg):
    p = quadratic_whole(5, seed=1)
    run = solve(p.model(), p.setup, p.set, p.x_star, 0.0, Cfg(L0=p.L, max_iter=10))
    for rec in run.records:
        assert rec.cert >= 0.0
    assert run.x_last == pytest.approx(p.x_star, abs=1e-8)


def test_gm_exact_certificate_is_R2_over_A(box_problem):
    p = box_problem
    run = gm_solve(p.model(), p.setup, p.set, p.x0, p.R2, GMConfig(L0=p.L, max_iter=30))
    c = gm_certificate(run, p.R2, L_declared=p.L)
    assert c.delta_term == 0.0 and c.delta_tilde_term == 0.0
    assert c.bound_value == pytest.approx(p.R2 / run.A)
    assert c.rate_bound_holds


def test_gm_constant_delta_term_is_two_delta(box_problem):
    p = box_problem
    run = gm_solve(ShiftedModel(p.model(), 1e-3), p.setup, p.set, p.x0, p.R2, GMConfig(L0=p.L, max_iter=30))
    assert run.certificate.delta_term == pytest.approx(2e-3)


@pytest.mark.parametrize("solve,Cfg", [(gm_solve, GMConfig), (fgm_solve, FGMConfig)])
def test_certificate_bounds_gap_with_injection(solve, Cfg):
    p = composite_l1_box(10, seed=4)
    m = InexactProx(ShiftedModel(p.model(), 1e-3), seed=0)
    run = solve(m, p.setup, p.set, p.x0, p.R2, Cfg(L0=p.L / 4, max_iter=60, budget=InexactnessBudget(delta_tilde=1e-3)))
    gaps = run.column("f") - p.f_star
    assert np.all(gaps <= run.column("cert") + 1e-9)
    assert run.certificate.delta_tilde_term > 0


def test_fgm_faster_than_gm_on_ill_conditioned():
    p = quadratic_whole(20, seed=2, cond=1e3)
    g = gm_solve(p.model(), p.setup, p.set, p.x0, p.R2, GMConfig(max_iter=200))
    f = fgm_solve(p.model(), p.setup, p.set, p.x0, p.R2, FGMConfig(max_iter=200))
    assert p.f(f.x_last) - p.f_star < p.f(g.x_bar) - p.f_star


def test_fgm_requires_one_strongly_convex_setup(box_problem):
    p = box_problem
    with pytest.raises(NotOneStronglyConvex):
        fgm_solve(p.model(), EUCLIDEAN.scaled(np.zeros(8), 2.0), p.set, p.x0, p.R2)


def test_gm_restart_iteration_count():
    assert gm_restart_stages(1.0, 1 / 8, 4.0, 1.0) == (3, 16)
    assert math.prod(gm_restart_stages(1.0, 1 / 8, 4.0, 1.0)) == 48
    # eps >= R^2: a single stage
    assert gm_restart_stages(1.0, 2.0, 4.0, 1.0) == (1, 16)


def test_gm_restart_distance_bound():
    p = quadratic_box(10, seed=5, cond=10)
    run = gm_restart_solve(p.model(), StrongConvexityTag.right(p.mu), p.setup, p.set, p.x0, p.R2, 1e-6, p.L)
    assert run.N == math.prod(gm_restart_stages(p.R2, 1e-6, p.L, p.mu))
    assert p.setup.bregman(run.x_last, p.x_star) <= run.meta["V_bound"]


def test_fgm_restart_plan_and_degenerate():
    assert fgm_restart_plan(1.0, 10.0, 1e-3, 36.0)[1] == 36
    assert fgm_restart_plan(1.0, 1.0, 2.0, 36.0)[0] == 0
    p = quadratic_whole(5, seed=1)
    run = fgm_restart_solve(p.model(), StrongConvexityTag.norm(p.mu), p.setup, p.set, p.x0, p.R2, 10 * p.mu * p.R2)
    assert run.N == 0 and run.stop_reason == "no_stages"
    assert run.x_last == pytest.approx(p.x0)


def test_restarts_reject_missing_mu():
    p = quadratic_whole(5, seed=1)
    with pytest.raises(InvalidArgument):
        fgm_restart_solve(p.model(), StrongConvexityTag(), p.setup, p.set, p.x0, p.R2, 1e-3)


def test_strongly_convex_gm_bounds():
    p = quadratic_box(6, seed=7, cond=5)
    V0 = p.setup.bregman(p.x0, p.x_star)
    run = gm_strongly_convex_solve(p.model(), StrongConvexityTag.right(p.mu), p.setup, p.set, p.x0, p.L, 40, V0=V0)
    for x, dist, gap in zip(run.meta["iterates"][1:], run.meta["dist_bounds"], run.meta["gap_bounds"]):
        assert p.setup.bregman(x, p.x_star) <= dist + 1e-12
    assert p.f(run.x_bar) - p.f_star <= run.meta["gap_bounds"][-1] + 1e-12
    with pytest.raises(InvalidArgument):
        gm_strongly_convex_solve(p.model(), StrongConvexityTag.left(p.mu), p.setup, p.set, p.x0, p.L, 5)


def test_universal_smooth_case_tracks_plain_fgm():
    rng = np.random.default_rng(0)
    n = 6
    M = np.diag(np.linspace(0.1, 1.0, n))
    a = rng.uniform(-1, 1, n)
    p = HolderProblem(lambda x: 0.5 * float((x - a) @ M @ (x - a)), lambda x: M @ (x - a), 1.0, 1.0)
    x0 = np.zeros(n)
    R2 = 0.5 * float(a @ a)
    # the delta_k slack can only flip a backtracking decision once the exit
    # margin is itself ~eps, which happens after ~30 steps on this problem
    cfg = FGMConfig(L0=1.0, max_iter=25, keep_iterates=True)
    uni = fgm_universal_solve(make_universal_model(p, 1e-8), EUCLIDEAN, WholeSpace(n), x0, R2, 1e-8, cfg)
    plain = fgm_solve(make_universal_model(p, 1e-8), EUCLIDEAN, WholeSpace(n), x0, R2, cfg)
    assert uni.N == plain.N == 25
    for xu, xp in zip(uni.meta["iterates"], plain.meta["iterates"]):
        assert xu == pytest.approx(xp, abs=1e-6)


def test_universal_guarantee_nonsmooth():
    a = np.array([0.3, -0.1, 0.2])
    p = HolderProblem(lambda x: float(np.abs(x - a).sum()), lambda x: np.sign(x - a), 0.0, 2 * math.sqrt(3))
    x0 = np.ones(3)
    R2 = 0.5 * float((x0 - a) @ (x0 - a))
    run = fgm_universal_solve(make_universal_model(p, 0.05), EUCLIDEAN, WholeSpace(3), x0, R2, 0.05)
    assert run.stop_reason == "universal"
    assert p.f(run.x_last) <= 0.05


def test_fw_records_dt_and_certificate():
    p = quadratic_simplex(6, seed=2, setup=EUCLIDEAN)
    run = fw_solve(p.model(), EUCLIDEAN, p.set, p.x0, 1e-2, 1.0, FGMConfig(max_iter=5000))
    assert run.stop_reason == "certificate"
    assert np.allclose(run.column("delta_tilde"), 2.0 * run.column("L"))
    assert p.f(run.x_last) - p.f_star <= run.records[-1].cert + 1e-12
    with pytest.raises(UnsupportedSet):
        fw_solve(p.model(), EUCLIDEAN, WholeSpace(6), p.x0, 1e-2, 1.0)


def test_trace_csv_roundtrip_and_determinism(tmp_path, box_problem):
    p = box_problem
    runs = [gm_solve(p.model(), p.setup, p.set, p.x0, p.R2, GMConfig(max_iter=15)) for _ in range(2)]
    a, b = trace_csv(runs[0]), trace_csv(runs[1])
    assert a == b
    lines = a.splitlines()
    assert lines[0].startswith("# imopt-trace v1")
    assert tuple(lines[1].split(",")) == TRACE_COLUMNS
    path = tmp_path / "t.csv"
    write_trace(runs[0], path)
    rows = read_trace(path)
    assert len(rows) == 15
    assert rows[-1]["cert"] == runs[0].records[-1].cert
