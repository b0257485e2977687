import numpy as np
import pytest

from vekuabvp.boundarydata import signal_from_spec, unimodular_from_spec
from vekuabvp.diskgrid import Field
from vekuabvp.harness import pde_residual
from vekuabvp.hilbert import HilbertOperator, HilbertProblem
from vekuabvp.semilinear import (Nonlinearity, NonlinearityError, SolveReport, SolverConfig,
                                 SolverDivergence, bound_monitor, picard_continuation)


def test_majorant_examples():
    assert Nonlinearity("signed_power", 0.5).majorant(4.0) == pytest.approx(2.0)
    assert Nonlinearity("exp_clamped").majorant(7.0) == 1.0
    assert Nonlinearity("linear_saturating").majorant(3.0) == pytest.approx(0.75)
    table = Nonlinearity("custom-table", table=((-1.0, -2.0), (0.0, 0.0), (1.0, 1.0)))
    assert table.majorant(0.5) == pytest.approx(1.0)  # q(-0.5) = -1
    assert table.majorant(5.0) == pytest.approx(2.0)


def test_majorant_dominates_samples(rng):
    for nl in (Nonlinearity("signed_power", 0.3), Nonlinearity("linear_saturating")):
        w = rng.standard_normal(500) + 1j * rng.standard_normal(500)
        assert np.all(np.abs(nl(w)) <= nl.majorant(np.abs(w)) * (1 + 1e-12))


def test_values_and_domains():
    assert Nonlinearity("power_clamped", 0.5)(np.array([-4.0, 4.0])).tolist() == [0.0, 2.0]
    assert Nonlinearity("exp_clamped")(np.array([-1.0, 0.0, 2.0])).tolist() == [1.0, 1.0, np.exp(-2.0)]
    assert Nonlinearity("signed_power", 0.5)(np.array([0j, -4 + 0j]))[1] == pytest.approx(-2.0)
    with pytest.raises(NonlinearityError):
        Nonlinearity("power_clamped", 0.5)(np.array([1j]))
    with pytest.raises(NonlinearityError):
        Nonlinearity("signed_power", 1.5)
    with pytest.raises(NonlinearityError):
        Nonlinearity("cubic")
    with pytest.raises(NonlinearityError):
        Nonlinearity("custom-table", table=((1.0, 0.0), (0.0, 1.0)))


@pytest.mark.parametrize("kind", ["power_clamped", "signed_power", "exp_clamped", "linear_saturating", "constant"])
def test_presets_are_certified_sublinear(kind):
    assert Nonlinearity(kind, 0.5).certify()


def test_solver_config_validation():
    for bad in ({"p": 2.0}, {"damping": 0.0}, {"tol": 0.0}, {"tau_steps": (0.5,)},
                {"tau_steps": (0.5, 0.25, 1.0)}, {"max_iter": 0}):
        with pytest.raises(ValueError):
            SolverConfig(**bad)


def _hilbert_operator(grid):
    n = grid.n_theta
    return HilbertOperator(HilbertProblem(unimodular_from_spec("one", n), signal_from_spec("coskt:1", n)), grid)


def test_zero_coefficient_gives_linear_solution(small_grid):
    op = _hilbert_operator(small_grid)
    h = Field(small_grid, np.zeros(small_grid.shape, dtype=complex), 0.5)
    g, f, rep = picard_continuation("vekua", h, Nonlinearity("signed_power", 0.5), op)
    assert np.all(g.values == 0)
    assert np.max(np.abs(f - small_grid.nodes)) < 1e-12
    assert rep.bound_monitor.verdict == "H3 satisfied"


def test_contraction_regime(small_grid):
    op = _hilbert_operator(small_grid)
    h = Field.from_function(small_grid, lambda z: 0.3 * np.clip(1 - np.abs(z) ** 2 / 0.2, 0, None) ** 3 + 0j, 0.5)
    cfg = SolverConfig(damping=1.0, tol=1e-8, tau_steps=(1.0,))
    g, f, rep = picard_continuation("vekua", h, Nonlinearity("linear_saturating"), op, cfg)
    assert rep.iterations[-1] <= 25 and rep.residual_fixed_point < 1e-8
    assert rep.bound_monitor.verdict == "H3 satisfied" and rep.bound_monitor.margin > 0
    assert pde_residual("vekua", f, h, Nonlinearity("linear_saturating")) < 5e-3


def test_divergence_is_reported(small_grid):
    class Amplifier:
        def apply(self, g):
            return 1e3 * (g.values + 1.0), None

    h = Field.from_function(small_grid, lambda z: np.ones(z.shape, dtype=complex), 0.5)
    with pytest.raises(SolverDivergence) as info:
        picard_continuation("vekua", h, Nonlinearity("linear_saturating"), Amplifier(),
                            SolverConfig(max_iter=3, tau_steps=(1.0,)))
    assert info.value.tau == 1.0 and info.value.report.iterations == [3]


def test_bound_monitor_cases():
    nl = Nonlinearity("signed_power", 0.5)
    assert bound_monitor(SolveReport(), 0.0, nl).verdict == "H3 satisfied"
    # converged run: maps stay under the cap
    ok = SolveReport(norm_history=[0.0, 0.5, 0.6], sup_history=[1.0, 1.5, 1.6], map_norm_history=[0.5, 0.6, 0.6])
    v = bound_monitor(ok, 1.0, nl)
    assert v.verdict == "H3 satisfied" and v.margin > 0
    # constructed runaway: norms grow past the a-priori bound
    bad = SolveReport(norm_history=[0.0, 1.0, 10.0, 1e3, 1e5], sup_history=[1.0, 2.0, 11.0, 1001.0, 1e5 + 1],
                      map_norm_history=[1.0, 10.0, 1e3, 1e5, 1e7])
    v = bound_monitor(bad, 1.0, nl)
    assert v.verdict.startswith("H3 violated") and v.flagged


def test_poisson_mode_rejects_complex_coefficient(small_grid):
    H = Field.from_function(small_grid, lambda z: np.ones(z.shape, dtype=complex), 0.5)
    with pytest.raises(ValueError):
        picard_continuation("poisson", H, Nonlinearity("signed_power", 0.5), None)
    with pytest.raises(NonlinearityError):
        picard_continuation("vekua", H, Nonlinearity("power_clamped", 0.5), None)
