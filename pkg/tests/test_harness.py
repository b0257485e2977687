import json

import numpy as np
import pytest

from vekuabvp.boundarydata import signal_from_spec, unimodular_from_spec
from vekuabvp.diskgrid import BoundarySignal, Field, GridError, make_grid
from vekuabvp.harness import (SCHEMA, ConeProbe, ConfigError, RunConfig, angular_limit_estimate,
                              load_config, nonuniqueness_demo, parse_coefficient, pde_residual, preset,
                              preset_names, probe_field, run_pipeline)
from vekuabvp.harness.pipeline import BOUNDARY_COLUMNS, FIELD_COLUMNS
from vekuabvp.harness.probes import near_angles, probe_angles
from vekuabvp.hilbert import HilbertProblem, assemble_hilbert
from vekuabvp.transforms import poisson_integral

SMALL = {"grid.n_r": 48, "grid.n_theta": 96}


# ----------------------------------------------------------------- probes

def test_probe_constant_and_linear(medium_grid):
    p = ConeProbe(0.0, distances=(2e-1, 1e-1))
    est, spread = angular_limit_estimate(probe_field(Field(medium_grid, np.full(medium_grid.shape, 2.5)), p), p)
    assert est == pytest.approx(2.5, abs=1e-12) and spread < 1e-12
    f = Field(medium_grid, np.real(medium_grid.nodes))
    pz = ConeProbe(0.0, distances=(3e-1, 2e-1, 1.2e-1))
    est, spread = angular_limit_estimate(probe_field(f, pz), pz)
    # the estimate is the mean over the innermost ring of Re z at the probe points
    assert est == pytest.approx(np.mean(pz.points[-1].real), abs=1e-8)
    assert spread == pytest.approx(np.ptp(pz.points[-2:].real), abs=1e-8)


def _arc_measure(z, a, b):
    """Harmonic measure of the arc (a, b): closed form by inscribed angles."""
    ang = np.mod(np.angle((np.exp(1j * b) - z) / (np.exp(1j * a) - z)), 2 * np.pi)
    return ang / np.pi - (b - a) / (2 * np.pi)


@pytest.mark.parametrize("theta0,expect", [(1.5 * np.pi, 1.0), (0.5 * np.pi, 0.0)])
def test_probe_poisson_of_step(theta0, expect):
    n = 1024
    step = signal_from_spec("step:0:1", n)
    p = ConeProbe(theta0, distances=(1e-1, 1e-2, 1e-3))
    vals = poisson_integral(step, p.points.ravel()).reshape(p.points.shape)
    est, _ = angular_limit_estimate(vals, p)
    assert est == pytest.approx(expect, abs=5e-3)
    oracle = _arc_measure(p.points[-1], np.pi, 2 * np.pi)
    assert np.max(np.abs(vals[-1] - oracle)) < 5e-3


def test_probe_validation(small_grid):
    for bad in ({"aperture_deg": 90}, {"n_rays": 0}, {"distances": (1e-2, 1e-1)}, {"distances": (1.5,)}):
        with pytest.raises(ValueError):
            ConeProbe(0.0, **bad)
    with pytest.raises(GridError, match="exits"):
        probe_field(Field(small_grid, np.zeros(small_grid.shape)), ConeProbe(0.0, distances=(1e-1, 1e-3)))
    th = probe_angles(64)
    assert np.allclose(np.diff(th), 2 * np.pi / 64) and th[0] == pytest.approx(np.pi / 64)
    assert near_angles(np.array([0.01, 1.0, 6.28]), [0.0], 0.02).tolist() == [True, False, True]


# -------------------------------------------------------------- residuals

def test_pde_residual_examples(medium_grid):
    n = medium_grid.n_theta
    h = Field.from_function(medium_grid, lambda z: np.clip(1 - np.abs(z - 0.1) ** 2 / 0.16, 0, None) ** 4 + 0j, 0.5)
    prob = HilbertProblem(unimodular_from_spec("phasesin:0.3:1", n), signal_from_spec("coskt:1", n))
    f = assemble_hilbert(prob, h, medium_grid.nodes.ravel()).reshape(medium_grid.shape)
    assert pde_residual("vekua", f, h) < 2e-3
    zero = Field(medium_grid, np.zeros(medium_grid.shape, dtype=complex), 0.5)
    assert pde_residual("vekua", zero.values, zero) == 0.0
    noise = np.random.default_rng(0).standard_normal(medium_grid.shape)
    assert pde_residual("vekua", f * (1 + 0.1 * noise), h) > 1e-2
    with pytest.raises(GridError):
        coarse = make_grid(6, 8, 0.9, 0.5)
        pde_residual("poisson", np.zeros((6, 8)), Field(coarse, np.zeros((6, 8)), 0.5))


# ----------------------------------------------------------------- config

def test_config_defaults_and_validation(tmp_path):
    cfg = RunConfig.from_dict({})
    assert cfg.kind == SCHEMA["problem"]["kind"] and cfg["grid.n_r"] == 128
    assert RunConfig.from_dict(cfg.to_dict()).to_dict() == cfg.to_dict()
    with pytest.raises(ConfigError, match="parameter out of range"):
        RunConfig.from_dict({"grid": {"n_r": 2}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"grid": {"colour": 3}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"problem": {"kind": "hilbert"}, "nonlinearity": {"kind": "power_clamped"}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"problem": {"kind": "hilbert"}, "nonlinearity": {"substitution": "negate"}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"chart": {"spec": "poly:1,0,0.9,0"}})
    upd = cfg.with_updates({"grid.n_r": 64, "solver": {"damping": 0.25}})
    assert upd["grid.n_r"] == 64 and upd["solver.damping"] == 0.25 and cfg["grid.n_r"] == 128
    path = tmp_path / "c.yaml"
    path.write_text(upd.to_yaml())
    assert load_config(path).to_dict() == upd.to_dict()
    path.write_text("grid: [1, 2")
    with pytest.raises(ConfigError):
        load_config(path)


def test_coefficient_specs():
    f, is_complex, extent = parse_coefficient("zero")
    assert not is_complex and not np.any(f(np.array([0.1, 0.3])))
    f, is_complex, extent = parse_coefficient("cbump:1:0.5")
    assert is_complex and f(np.array([0.3 + 0j]))[0] == pytest.approx(1 + 0.5j)
    f, _, extent = parse_coefficient("bump:4:0.28:0.21:0.12")
    assert f(np.array([0.28 + 0.21j]))[0] == pytest.approx(4.0) and extent == pytest.approx(0.47)
    with pytest.raises(ValueError):
        parse_coefficient("wave:1")


def test_presets():
    c5 = preset("corollary5")
    assert c5.kind == "poincare" and c5.solver_mode == "poisson"
    assert c5["nonlinearity.kind"] == "power_clamped" and c5["nonlinearity.beta"] == 0.5
    assert c5["data.nu"].startswith("rotnormal")
    c10 = preset("corollary10")
    assert c10.kind == "neumann" and c10["nonlinearity.kind"] == "exp_clamped"
    assert c10["nonlinearity.substitution"] == "negate"
    td = preset("theoremD-linear")
    assert td.kind == "hilbert" and td["coefficient.spec"] == "zero"
    assert td["data.lambda"].startswith("phasestep") and td["data.phi"].startswith("step")
    assert set(preset_names()) >= {f"corollary{k}" for k in range(5, 11)}
    with pytest.raises(ConfigError):
        preset("corollary99")


# --------------------------------------------------------------- pipeline

def test_pipeline_config_error_exit(tmp_path):
    r = run_pipeline({"grid": {"n_r": 2}}, tmp_path)
    assert r.exit_code != 0 and "parameter out of range" in r.report["error"]["message"]
    assert json.loads((tmp_path / "report.json").read_text())["exit_code"] == r.exit_code
    bad = run_pipeline(preset("luzin-dirichlet").with_updates({**SMALL, "problem.kind": "hilbert",
                                                               "data.lambda": "expikt:1"}))
    assert bad.exit_code == 2 and "not integrable" in bad.report["error"]["message"]


def test_pipeline_divergence_exit():
    r = run_pipeline(preset("corollary5").with_updates({**SMALL, "solver.max_iter": 1}))
    assert r.exit_code == 3 and r.report["status"] == "error"


def test_pipeline_artifacts(tmp_path):
    cfg = preset("corollary8").with_updates(SMALL)
    r = run_pipeline(cfg, tmp_path)
    assert r.exit_code == 0
    fields = (tmp_path / "fields.csv").read_text().splitlines()
    assert fields[0].split(",") == list(FIELD_COLUMNS) and len(fields) == 48 * 96 + 1
    bnd = (tmp_path / "boundary.csv").read_text().splitlines()
    assert bnd[0].split(",") == list(BOUNDARY_COLUMNS) and len(bnd) == 65
    rep = json.loads((tmp_path / "report.json").read_text())
    assert {"solve", "boundary", "verification", "neumann_chain", "config"} <= set(rep)
    assert rep["config"] == cfg.to_dict()


def test_substitution_reports_original_equation():
    r = run_pipeline(preset("corollary7").with_updates(SMALL))
    assert r.exit_code == 0
    s = r.report["solve"]
    assert "residual_pde_original" in s and s["clamp_active_fraction"] == 0.0
    assert "V = -U" in r.report["substitution"]


def test_demo_depths_and_repeatability():
    base = preset("luzin-dirichlet").with_updates({**SMALL, "problem.kind": "hilbert", "data.lambda": "one",
                                                   "data.phi": "coskt:1"})
    r12 = nonuniqueness_demo(base.with_updates({"hilbert.singular_depth": 12}))
    r4 = nonuniqueness_demo(base.with_updates({"hilbert.singular_depth": 4}))
    assert r12["passed"] and r4["passed"]
    assert r12["interior_sup_difference"] > 1e-3
    assert r12["median_residual_without_singular"] == r4["median_residual_without_singular"]
    a = run_pipeline(base)
    b = run_pipeline(base)
    assert np.array_equal(a.solution.values, b.solution.values) and a.fields == b.fields
    with pytest.raises(ConfigError):
        nonuniqueness_demo(preset("corollary5"))
