import numpy as np
import pytest

from conftest import smooth_bump
from vekuabvp.boundarydata import CantorLadder, antiderivative
from vekuabvp.diskgrid import BoundarySignal, Field
from vekuabvp.harness import pde_residual
from vekuabvp.transforms import (TransformError, boundary_theta_derivative, measure_schwartz,
                                 measure_transform_bounds, newtonian_on_grid, newtonian_potential,
                                 poisson_integral, poisson_trapezoid, pompeiu_on_grid,
                                 pompeiu_transform, schwartz_integral)


def _indicator(grid, rho=0.5):
    return Field.from_function(grid, lambda z: np.ones(z.shape, dtype=complex), rho)


def test_pompeiu_zero_and_indicator(small_grid):
    zero = Field(small_grid, np.zeros(small_grid.shape, dtype=complex), 0.5)
    assert np.all(pompeiu_transform(zero, [0.1, 0.7j]) == 0)
    ind = _indicator(small_grid)
    T = pompeiu_transform(ind, [0.25, 1.0])
    assert T[0] == pytest.approx(0.25, abs=1e-12)
    assert T[1] == pytest.approx(0.25, abs=1e-12)


def test_pompeiu_nonconstant_closed_form(medium_grid):
    # T[conj(w) 1_{|w|<rho}] = conj(z)^2 / 2 inside, rho^4 / (2 z^2) outside
    z = np.array([0.1 + 0.2j, -0.3j, 0.45, 0.6 - 0.1j, 0.9j])
    T = pompeiu_transform(Field.from_function(medium_grid, np.conj, 0.5), z)
    exact = np.where(np.abs(z) <= 0.5, np.conj(z) ** 2 / 2, 0.5**4 / (2 * z**2))
    assert np.max(np.abs(T - exact)) < 2e-4


def test_pompeiu_against_brute_force(small_grid):
    # brute-force midpoint quadrature on a 16x finer Cartesian lattice
    bump = smooth_bump(0.1, 0.4)
    g = Field.from_function(small_grid, bump, 0.5)
    z = np.array([0.2 + 0.1j, 0.7 - 0.2j])
    h = 0.8 / 800
    x = -0.3 + h * (np.arange(800) + 0.5)
    w = (x[:, None] + 1j * (x[None, :] + 0.0)).ravel()
    vals = bump(w)
    ref = np.array([-np.sum(vals / (w - p)) * h * h / np.pi for p in z])
    assert np.max(np.abs(pompeiu_transform(g, z) - ref)) < 1e-3


def test_source_identity_dbar(medium_grid):
    g = Field.from_function(medium_grid, smooth_bump(), 0.5)
    assert pde_residual("vekua", pompeiu_on_grid(g), g) < 1e-3


def test_boundary_theta_derivative(small_grid):
    th = np.linspace(0, 2 * np.pi, 9)
    d = boundary_theta_derivative(_indicator(small_grid), th)
    assert np.max(np.abs(d - (-1j * 0.25 * np.exp(-1j * th)))) < 1e-10
    zero = Field(small_grid, np.zeros(small_grid.shape, dtype=complex), 0.5)
    assert np.all(boundary_theta_derivative(zero, th) == 0)


def test_boundary_theta_derivative_matches_differences(small_grid):
    g = Field.from_function(small_grid, lambda z: smooth_bump()(z) * (1 + 1j * z), 0.5)
    th = np.linspace(0.1, 6.0, 7)
    eps = 1e-5
    fd = (pompeiu_transform(g, np.exp(1j * (th + eps))) - pompeiu_transform(g, np.exp(1j * (th - eps)))) / (2 * eps)
    assert np.max(np.abs(boundary_theta_derivative(g, th) - fd)) < 1e-6


def test_newtonian_indicator_at_origin(small_grid):
    G = Field.from_function(small_grid, lambda z: np.ones(z.shape), 0.5)
    rho = 0.5
    assert newtonian_potential(G, [0.0])[0] == pytest.approx(rho**2 * (2 * np.log(rho) - 1) / 4, abs=1e-10)
    assert rho**2 * (2 * np.log(rho) - 1) / 4 == pytest.approx(-0.14914, abs=1e-5)


def test_newtonian_laplacian(medium_grid):
    G = Field.from_function(medium_grid, lambda z: np.real(smooth_bump()(z)), 0.5)
    assert pde_residual("poisson", newtonian_on_grid(G), G) < 1e-3


def test_schwartz_examples():
    n = 128
    th = 2 * np.pi * np.arange(n) / n
    z = np.array([0.0, 0.3 + 0.4j, -0.85j])
    const = antiderivative(BoundarySignal(np.zeros(n)))
    assert np.max(np.abs(schwartz_integral(const, z))) < 1e-15
    assert np.max(np.abs(schwartz_integral(antiderivative(BoundarySignal(np.cos(th))), z) - z)) < 1e-12
    assert np.max(np.abs(schwartz_integral(antiderivative(BoundarySignal(-np.sin(th))), z) - 1j * z)) < 1e-12


def test_measure_schwartz_against_stieltjes_sum():
    mu = CantorLadder(6)
    z = np.array([0.2 + 0.1j, -0.5, 0.7j])
    t = np.linspace(0, 2 * np.pi, 2_000_001)
    dC = np.diff(mu(t))
    tm = 0.5 * (t[1:] + t[:-1])
    k = (np.exp(1j * tm)[None, :] + z[:, None]) / (np.exp(1j * tm)[None, :] - z[:, None])
    ref = (k * dC[None, :]).sum(axis=1) / (2 * np.pi)
    assert np.max(np.abs(measure_schwartz(mu, z) - ref)) < 1e-6


def test_poisson_integral_examples():
    n = 256
    th = 2 * np.pi * np.arange(n) / n
    assert np.max(np.abs(poisson_integral(BoundarySignal(np.full(n, 2.5)), [0.3, 0.9j]) - 2.5)) < 1e-13
    assert poisson_integral(BoundarySignal(np.cos(th)), [0.5])[0] == pytest.approx(0.5, abs=1e-13)
    phi = np.exp(np.sin(th))
    assert poisson_integral(BoundarySignal(phi), [0.0])[0] == pytest.approx(np.mean(phi), abs=1e-13)
    z = np.array([0.5 + 0.2j])
    assert np.max(np.abs(poisson_trapezoid(BoundarySignal(np.cos(2 * th)), z) - np.real(z**2))) < 1e-12


def test_transform_bounds(small_grid):
    b = measure_transform_bounds(small_grid, p=4.0, n_sources=2, n_pairs=20)
    assert b.m1 > 0 and b.m2 > 0 and b.alpha == 0.5
    with pytest.raises(TransformError):
        measure_transform_bounds(small_grid, p=2.0)
