import json

import pytest
import yaml
from click.testing import CliRunner

from vekuabvp.cli import main

SMALL = ["--set", "grid.n_r=48", "--set", "grid.n_theta=96"]


@pytest.fixture
def runner():
    return CliRunner()


def test_presets_list_and_dump(runner, tmp_path):
    r = runner.invoke(main, ["presets", "list"])
    assert r.exit_code == 0 and "corollary5" in r.output and "luzin-dirichlet" in r.output
    r = runner.invoke(main, ["presets", "dump", "corollary7"])
    assert r.exit_code == 0 and yaml.safe_load(r.output)["problem"]["kind"] == "poincare"
    assert runner.invoke(main, ["presets", "dump", "nope"]).exit_code == 2


def test_solve_writes_artifacts(runner, tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(runner.invoke(main, ["presets", "dump", "corollary8"]).output)
    out = tmp_path / "out"
    # the coarse grid under-resolves the bump; the stated PDE tolerance is checked at full resolution
    r = runner.invoke(main, ["solve", "--config", str(cfg), "--out", str(out), *SMALL,
                             "--set", "verify.pde_tol=0.2"])
    assert r.exit_code == 0, r.output
    assert {p.name for p in out.iterdir()} == {"report.json", "fields.csv", "boundary.csv"}
    assert json.loads((out / "report.json").read_text())["status"] == "ok"
    assert "PASS" in r.output


def test_config_errors_exit_2(runner, tmp_path):
    r = runner.invoke(main, ["solve", "--preset", "corollary5", "--set", "grid.n_r=2", "--out", str(tmp_path)])
    assert r.exit_code == 2 and "parameter out of range" in r.output
    bad = tmp_path / "bad.yaml"
    bad.write_text("grid: {unknown: 1}\n")
    assert runner.invoke(main, ["verify", "--config", str(bad)]).exit_code == 2
    assert runner.invoke(main, ["verify"]).exit_code == 2
    assert runner.invoke(main, ["verify", "--preset", "corollary5", "--set", "grid.n_r"]).exit_code == 2


def test_verify_failure_and_divergence(runner):
    r = runner.invoke(main, ["verify", "--preset", "corollary8", *SMALL, "--set", "verify.boundary_tol=1e-12"])
    assert r.exit_code == 4 and "FAIL" in r.output
    r = runner.invoke(main, ["verify", "--preset", "corollary5", *SMALL, "--set", "solver.max_iter=1"])
    assert r.exit_code == 3


def test_demo_nonuniqueness(runner, tmp_path):
    args = ["demo", "nonuniqueness", "--preset", "luzin-dirichlet", *SMALL, "--set", "problem.kind=hilbert",
            "--set", "data.lambda=one", "--set", "data.phi=coskt:1", "--out", str(tmp_path)]
    r = runner.invoke(main, args)
    assert r.exit_code == 0, r.output
    assert json.loads(r.output)["passed"] is True
