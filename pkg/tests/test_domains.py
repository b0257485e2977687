import numpy as np
import pytest

from conftest import smooth_bump
from vekuabvp.diskgrid import Field, GridError, interpolate_spectral
from vekuabvp.domains import (ChartError, ConformalChart, domain_inner_normal, parse_chart,
                              pullback_boundary, pullback_poisson, pullback_vekua, pushforward_solution)

A, B = 1.5 + 0.5j, 0.2 - 0.1j
AFFINE = "affine:1.5,0.5,0.2,-0.1"


def h(w):
    return smooth_bump(0.2 - 0.05j, 0.3)(w) * (1 + 1j * w)


def H(w):
    return np.real(smooth_bump(0.2 - 0.05j, 0.3)(w))


def test_identity_pullbacks(small_grid):
    chart = parse_chart("identity")
    z = small_grid.nodes
    assert chart.is_identity and not parse_chart(AFFINE).is_identity
    hv = pullback_vekua(h, chart, small_grid).values
    assert np.array_equal(hv, np.where(small_grid.inside(0.5), h(z), 0))
    assert np.array_equal(pullback_poisson(H, chart, small_grid).values, np.where(small_grid.inside(0.5), H(z), 0))


def test_affine_chain_rule(small_grid):
    chart = parse_chart(AFFINE)
    z = small_grid.nodes
    assert np.max(np.abs(pullback_vekua(h, chart, small_grid).values - h(A * z + B) * np.conj(A))) < 1e-14
    assert np.max(np.abs(pullback_poisson(H, chart, small_grid).values - abs(A) ** 2 * H(A * z + B))) < 1e-14
    zero = pullback_vekua(lambda w: np.zeros(w.shape, dtype=complex), chart, small_grid)
    assert not np.any(zero.values)


def test_pullback_support_cap(small_grid):
    # a bump of radius 1.4 around C(0) pulls back to |z| < 0.89, beyond the 0.5 cap
    wide = lambda w: smooth_bump(B, 1.4)(w) + 0j  # noqa: E731
    with pytest.raises(ChartError, match="support"):
        pullback_vekua(wide, parse_chart(AFFINE), small_grid)


def test_boundary_pullbacks():
    n = 64
    th = 2 * np.pi * np.arange(n) / n
    f = lambda s: np.cos(s) + 0.3 * np.sin(2 * s)  # noqa: E731
    same = pullback_boundary(f, parse_chart("identity"), n)
    assert np.max(np.abs(same.values - f(th))) < 1e-9
    const = pullback_boundary(lambda s: np.full(np.shape(s), 2.5), parse_chart(AFFINE), n)
    assert np.all(const.values == 2.5)
    # b = 0 and real a > 0: the boundary point is a e^{i theta}
    g = lambda p: np.real(p) ** 2 - np.imag(p)  # noqa: E731
    out = pullback_boundary(g, parse_chart("affine:2,0,0,0"), n, param="point")
    assert np.max(np.abs(out.values - g(2 * (1 - 1e-6) * np.exp(1j * th)))) < 1e-14
    # arc-length parameter is invariant under similarities
    arc = pullback_boundary(f, parse_chart(AFFINE), n)
    assert np.max(np.abs(arc.values - f(th))) < 1e-6


def test_domain_inner_normal_pulls_back_to_disk_normal():
    chart = parse_chart("joukowski:0.3")
    th = 2 * np.pi * (np.arange(16) + 0.5) / 16
    nu = pullback_boundary(domain_inner_normal(chart), chart, 16, role="nu", param="point", thetas=th)
    assert np.max(np.abs(nu + np.exp(1j * th))) < 1e-4


def test_pushforward(small_grid):
    ident = Field(small_grid, small_grid.nodes.astype(complex))
    w = np.array([0.1 + 0.2j, -0.4j, 0.6])
    assert np.max(np.abs(pushforward_solution(ident, parse_chart("identity"), w) - interpolate_spectral(ident, w))) == 0
    chart = parse_chart(AFFINE)
    xi = A * np.array([0.0, 0.3 + 0.4j, -0.7]) + B
    assert np.max(np.abs(pushforward_solution(ident, chart, xi) - (xi - B) / A)) < 1e-10
    with pytest.raises((ChartError, GridError)):
        pushforward_solution(ident, chart, [B + 3 * A])


@pytest.mark.parametrize("spec", ["poly:1,0,0.3,0.1", "joukowski:0.5", AFFINE])
def test_inverse_round_trip(spec):
    chart = parse_chart(spec)
    rng = np.random.default_rng(5)
    z = 0.9 * np.sqrt(rng.uniform(0, 1, 300)) * np.exp(2j * np.pi * rng.uniform(0, 1, 300))
    assert np.max(np.abs(chart.inverse(chart(z)) - z)) < 1e-10
    eps = 1e-6
    zc = 0.4 + 0.2j
    fd = (chart(zc + eps) - chart(zc - eps)) / (2 * eps)
    assert abs(fd - chart.derivative(zc)) < 1e-8


@pytest.mark.parametrize("spec", ["affine:0,0,1,0", "poly:1,0,0.6,0", "joukowski:1.2", "spiral:1", "poly:1,0,0.5"])
def test_invalid_charts(spec):
    with pytest.raises(ChartError):
        ConformalChart(spec)


def test_cone_deviation():
    assert parse_chart(AFFINE).cone_deviation(1.0) < 1e-9
    dev = parse_chart("joukowski:0.3").cone_deviation(0.5)
    assert 0 < dev < 1.0
