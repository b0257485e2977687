import numpy as np
import pytest

from vekuabvp.boundarydata import (arg_principal, signal_from_spec, unimodular_from_spec,
                                   unimodular_function)
from vekuabvp.diskgrid import BoundarySignal, Field, dbar_fd
from vekuabvp.harness import pde_residual
from vekuabvp.harness.probes import angular_limit_estimate, probe_set, split_values, stack_points
from vekuabvp.hilbert import (HilbertError, HilbertOperator, HilbertProblem, SingularConfig,
                              a_function, assemble_hilbert, boundary_exp_beta, build_A, build_Phi_g,
                              build_phi_g, decompose_arg, multiplier, phase_jumps, weight_exponents)

N = 256
TH = 2 * np.pi * np.arange(N) / N
Z = np.array([0.0, 0.3 + 0.2j, -0.5j, 0.7, -0.8 + 0.1j])


def _indicator(grid):
    return Field.from_function(grid, lambda z: np.ones(z.shape, dtype=complex), 0.5)


def _zero(grid):
    return Field(grid, np.zeros(grid.shape, dtype=complex), 0.5)


def test_multiplier_constant_lambda():
    assert np.max(np.abs(build_A(unimodular_from_spec("one", N), Z) - 1)) < 1e-15
    A = build_A(unimodular_from_spec("phase:0.7", N), Z)
    assert np.max(np.abs(A - np.exp(0.7j))) < 1e-13


@pytest.mark.parametrize("spec", ["phasesin:0.5:2", "expikt:-1", "rotnormal:-0.4", "phasestep:0:1.5"])
def test_multiplier_boundary_relations(spec):
    """A = exp(i a): |A| e^beta -> 1 and arg A -> alpha along radii, off jumps."""
    lam = unimodular_from_spec(spec, N)
    dec = decompose_arg(arg_principal(lam))
    assert np.max(np.abs(np.exp(1j * a_function(dec, Z)) - multiplier(dec, Z))) < 1e-12
    th = (np.arange(64) + 0.5) * 2 * np.pi / 64
    zeta = (1 - 1e-6) * np.exp(1j * th)
    A = multiplier(dec, zeta)
    lam_t = unimodular_function(spec)(th)
    away = np.min(np.abs(np.angle(np.exp(1j * (th[:, None] - np.array([0.0, np.pi])[None, :])))), axis=1) > 0.1
    assert np.median(np.abs(np.angle(A * np.conj(lam_t)))[away]) < 1e-3
    # e^beta interpolated at th from the node values
    eb = np.interp(th, np.append(TH, 2 * np.pi), np.append(boundary_exp_beta(dec), boundary_exp_beta(dec)[0]))
    assert np.median(np.abs(np.abs(A) * eb - 1)[away]) < 1e-3


def test_phase_jumps_and_decomposition():
    alpha = arg_principal(unimodular_from_spec("phasestep:0:1.5", N))
    J = phase_jumps(alpha)
    assert set(np.flatnonzero(J)) == {N // 2 - 1, N - 1}
    assert J[N // 2 - 1] == pytest.approx(1.5) and J[N - 1] == pytest.approx(-1.5)
    dec = decompose_arg(alpha)
    assert dec.winding == 0
    assert np.max(np.abs(np.exp(1j * dec.alpha(TH)) - np.exp(1j * alpha.values))) < 1e-12
    # a smooth phase has no jumps and integer winding
    smooth = decompose_arg(arg_principal(unimodular_from_spec("expikt:-2", N)))
    assert smooth.winding == -2 and isinstance(smooth.winding, int)
    assert not np.any(phase_jumps(arg_principal(unimodular_from_spec("phasesin:0.5:2", N))))


def test_non_integrable_weight_is_rejected():
    dec = decompose_arg(arg_principal(unimodular_from_spec("expikt:1", N)))
    assert min(e for _, e in weight_exponents(dec)) <= -1
    with pytest.raises(HilbertError, match="not integrable"):
        HilbertProblem(unimodular_from_spec("expikt:1", N), signal_from_spec("coskt:1", N))


def test_phi_g_examples(small_grid):
    lam = unimodular_from_spec("one", small_grid.n_theta)
    th = small_grid.thetas
    assert np.all(build_phi_g(lam, _zero(small_grid)).values == 0)
    assert np.max(np.abs(build_phi_g(lam, _indicator(small_grid)).values - 0.25 * np.cos(th))) < 1e-12
    lam1 = unimodular_from_spec("expikt:1", small_grid.n_theta)
    assert np.max(np.abs(build_phi_g(lam1, _indicator(small_grid)).values - 0.25 * np.cos(2 * th))) < 1e-12


def test_Phi_g_examples(small_grid):
    n = small_grid.n_theta
    p = HilbertProblem(unimodular_from_spec("one", n), signal_from_spec("coskt:1", n))
    assert np.all(build_Phi_g(p, _zero(small_grid)).values() == 0)
    path = build_Phi_g(p, _indicator(small_grid))
    mid = path.nodes[:-1] + np.pi / n
    assert np.max(np.abs(path.midpoint_derivative() - 0.25 * np.cos(mid))) < 1e-3
    # without closure the S term moves the endpoint; a Cantor closure of the
    # same depth would absorb it, since both are multiples of one ladder
    pn = HilbertProblem(p.lam, p.phi, closure="none")
    ps = HilbertProblem(p.lam, p.phi, closure="none", singular=SingularConfig(12, True))
    g = _indicator(small_grid)
    a, b = build_Phi_g(pn, g), build_Phi_g(ps, g)
    assert abs(b.values()[-1] - a.values()[-1]) > 1e-3
    assert build_Phi_g(HilbertProblem(p.lam, p.phi, singular=SingularConfig(12, True)), g).jump() == pytest.approx(0, abs=1e-12)
    assert abs(b.values()[n // 3] - a.values()[n // 3]) > 1e-6
    steps = np.zeros(n, dtype=bool)
    for _, mu in b.singular_part:
        steps |= mu.near_steps(mid, 2 * np.pi / n)
    assert np.max(np.abs(np.diff(b.base) - np.diff(a.base))) == 0.0
    assert np.max(np.abs(np.diff(b.values()) - np.diff(a.values()))[~steps]) < 1e-12


def test_assemble_examples(small_grid):
    n = small_grid.n_theta
    one = unimodular_from_spec("one", n)
    p = HilbertProblem(one, signal_from_spec("coskt:1", n))
    assert np.max(np.abs(assemble_hilbert(p, _zero(small_grid), Z) - Z)) < 1e-12
    p0 = HilbertProblem(one, BoundarySignal(np.zeros(n)))
    assert np.max(np.abs(assemble_hilbert(p0, _zero(small_grid), Z))) == 0.0
    with pytest.raises(HilbertError):
        assemble_hilbert(p, _zero(small_grid), [1.0])


def test_indicator_source_solution(medium_grid):
    n = medium_grid.n_theta
    p = HilbertProblem(unimodular_from_spec("one", n), BoundarySignal(np.zeros(n)))
    g = _indicator(medium_grid)
    probes = probe_set((np.arange(32) + 0.5) * 2 * np.pi / 32)
    op = HilbertOperator(p, medium_grid, stack_points(probes))
    f, Phi_g = op.apply(g)
    # the indicator is discontinuous, so the residual is checked away from |z| = 0.5
    d = dbar_fd(medium_grid, f)
    away = np.abs(np.abs(medium_grid.nodes) - 0.5) > 0.05
    mask = away & np.isfinite(d) & medium_grid.inside(0.8)
    assert np.max(np.abs(d - g.values)[mask]) < 1e-6
    vals = split_values(op.at_points(g, Phi_g), probes)
    est = np.array([angular_limit_estimate(np.real(v), pr)[0] for v, pr in zip(vals, probes)])
    assert np.median(np.abs(est)) < 5e-3


def test_grid_and_point_evaluation_agree(small_grid):
    n = small_grid.n_theta
    p = HilbertProblem(unimodular_from_spec("phasesin:0.5:2", n), signal_from_spec("coskt:1", n))
    g = Field.from_function(small_grid, lambda z: np.clip(1 - np.abs(z) ** 2 / 0.25, 0, None) ** 3 * (1 + 0j), 0.5)
    f_grid, _ = HilbertOperator(p, small_grid).apply(g)
    nodes = small_grid.nodes[small_grid.inside(0.9)]
    f_pts = assemble_hilbert(p, g, nodes)
    # ring quadrature on the grid and direct quadrature at points agree to discretization error
    assert np.max(np.abs(f_grid[small_grid.inside(0.9)] - f_pts)) < 1e-3
    assert pde_residual("vekua", f_grid, g) < 1e-2
