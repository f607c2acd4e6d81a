import pytest

from imopt.bench import RunConfig, compare_sinkhorn, parse_config
from imopt.cli import main
from imopt.errors import ConfigError
from imopt.ot import OTInstance, random_instance, save_instance
from imopt.trace import TRACE_COLUMNS

GM_CFG = """# gradient method on a box quadratic
solver=gm
model=quadratic
set=box:[-1,1]^6
max_iter=30   # short run
"""


@pytest.fixture
def cfg_file(tmp_path):
    path = tmp_path / "gm.cfg"
    path.write_text(GM_CFG)
    return path


def test_run_writes_trace_and_summary(tmp_path, cfg_file, capsys, monkeypatch):
    monkeypatch.delenv("IMOPT_SEED", raising=False)
    out = tmp_path / "t.csv"
    assert main(["run", str(cfg_file), "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# imopt-trace")
    assert tuple(lines[1].split(",")) == TRACE_COLUMNS
    assert len(lines) == 32
    summary = capsys.readouterr().out
    assert "gap=" in summary and "cert=" in summary and "iterations=30" in summary and "attempts=" in summary


def test_run_is_deterministic_and_seed_override(tmp_path, cfg_file, monkeypatch):
    monkeypatch.delenv("IMOPT_SEED", raising=False)
    paths = [tmp_path / f"{i}.csv" for i in range(3)]
    main(["run", str(cfg_file), "-o", str(paths[0])])
    main(["run", str(cfg_file), "-o", str(paths[1])])
    monkeypatch.setenv("IMOPT_SEED", "17")
    main(["run", str(cfg_file), "-o", str(paths[2])])
    a, b, c = (p.read_bytes() for p in paths)
    assert a == b
    assert a != c


def test_unknown_solver_exit_3(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("solver=nope\n")
    assert main(["run", str(path)]) == 3
    assert "solver" in capsys.readouterr().err


@pytest.mark.parametrize(
    "text,field",
    [("model=cube\n", "model"), ("eps=-1\n", "eps"), ("max_iter=ten\n", "max_iter"), ("colour=red\n", "colour"),
     ("set=sphere:3\n", "set")],
)
def test_config_errors_name_field(tmp_path, capsys, text, field):
    path = tmp_path / "c.cfg"
    path.write_text(text)
    assert main(["run", str(path)]) == 3
    assert field in capsys.readouterr().err


def test_solver_error_exit_2(tmp_path, capsys):
    path = tmp_path / "fw.cfg"
    path.write_text("solver=fw\nset=whole:4\n")
    assert main(["run", str(path)]) == 2
    assert "solver error" in capsys.readouterr().err


def test_parse_config_comments_and_types():
    cfg = parse_config("solver=fgm # accelerated\n\n eps = 1e-3\nmax_iter=7\n", env={})
    assert cfg.solver == "fgm" and cfg.eps == 1e-3 and cfg.max_iter == 7
    assert parse_config("seed=3\n", env={"IMOPT_SEED": "9"}).seed == 9
    with pytest.raises(ConfigError):
        parse_config("just words\n", env={})
    with pytest.raises(ConfigError):
        RunConfig(solver="prox_sinkhorn")


def test_prox_sinkhorn_summary_has_oracle_deviation(tmp_path, capsys):
    inst_path = tmp_path / "ot2.csv"
    save_instance(OTInstance([[0, 1], [1, 0]], [0.5, 0.5], [0.5, 0.5]), inst_path)
    cfg = tmp_path / "ot.cfg"
    cfg.write_text(f"solver=prox_sinkhorn\ninstance={inst_path}\neps=1e-3\noracle=on\n")
    assert main(["run", str(cfg), "-o", str(tmp_path / "o.csv")]) == 0
    out = capsys.readouterr().out
    assert "cost=" in out and "oracle_dev=" in out


def test_compare_sinkhorn_table(tmp_path, capsys):
    inst_path = tmp_path / "ot2.csv"
    save_instance(OTInstance([[0, 1], [1, 0]], [0.5, 0.5], [0.5, 0.5]), inst_path)
    assert main(["compare-sinkhorn", str(inst_path), "--eps", "1e-3", "--gamma-grid", "10,1,0.1"]) == 0
    lines = [ln for ln in capsys.readouterr().out.splitlines() if not ln.startswith("#")]
    assert lines[0] == "method,gamma,outer,total_inner,cost,cost_error"
    assert len(lines) == 5
    assert main(["compare-sinkhorn", str(inst_path), "--gamma-grid", ""]) == 3


def test_compare_rows_recorded_for_random_instance():
    rows = compare_sinkhorn(random_instance(4, 2), 1e-2, [1.0, 0.1])
    plain = rows[0]["total_inner"]
    assert all(r["total_inner"] > 0 for r in rows)
    # recorded, not a theorem: at desk scale some grid point beats plain Sinkhorn
    assert any(r["total_inner"] <= plain for r in rows[1:])


def test_validate_model_cli(capsys):
    assert main(["validate-model", "smooth", "--samples", "200"]) == 0
    assert "PASS" in capsys.readouterr().out
    assert main(["validate-model", "nonexistent"]) == 3


def test_selftest_single_criterion(capsys):
    assert main(["selftest", "--only", "11"]) == 0
    assert "[PASS] 11" in capsys.readouterr().out
