"""Integral operators on the disk and its boundary.

Area operators (the Pompeiu transform ``T_g`` and the logarithmic potential
``N_G``) at arbitrary points are direct quadratures over the grid's source
layers with the singular node handled by subtracting the closed-form
transform of the support disk.  Values at the grid nodes themselves come
from ring-wise mode integration (:mod:`vekuabvp.ringquad`).  Boundary operators (Schwartz and Poisson integrals) act on
the trigonometric interpolant of the samples, evaluated as a power series,
so they stay accurate up to the circle; symbolic singular parts of a path
are integrated exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .boundarydata import TWO_PI, AntiderivativePath, SingularMeasure
from .diskgrid import BoundarySignal, Field, PolarGrid, dbar_fd, dz_fd, lp_norm
from .ringquad import RingQuadrature

# |z| above which singular measures switch from power series to exact panels
SERIES_RADIUS = 0.95
_SERIES_TOL = 1e-15


class TransformError(ValueError):
    pass


def _points(points) -> np.ndarray:
    return np.atleast_1d(np.asarray(points, dtype=complex))


def _sources(g: Field):
    if g.support_radius is None:
        raise TransformError("source field needs a support radius")
    grid = g.grid
    if g.support_radius > grid.support_radius * (1 + 1e-12):
        raise TransformError("field support exceeds the grid's source layers")
    z, w, idx = grid.source_nodes()
    return grid, z, w, np.asarray(g.values).ravel()[idx]


def _nearest_source_values(grid: PolarGrid, vals: np.ndarray, points: np.ndarray):
    ir, it = grid.nearest_index(points)
    ir = np.minimum(ir, grid.n_inner - 1)
    return vals.reshape(grid.n_inner, grid.n_theta)[ir, it]


def disk_cauchy(points, radius: float) -> np.ndarray:
    """Pompeiu transform of the indicator of ``|w| <= radius``."""
    z = _points(points)
    out = np.empty_like(z)
    inside = np.abs(z) <= radius
    out[inside] = np.conj(z[inside])
    out[~inside] = radius ** 2 / z[~inside]
    return out


def disk_cauchy_linear(points, radius: float):
    """Transforms of ``(w - z)`` and ``conj(w - z)`` times the disk indicator.

    Here ``z`` is the evaluation point itself, so both are functions of
    ``z`` only: ``-radius**2`` and ``-conj(z)**2 / 2`` inside,
    ``-radius**2`` and ``radius**4 / (2 z**2) - conj(z) radius**2 / z``
    outside.
    """
    z = _points(points)
    inside = np.abs(z) <= radius
    lin = np.full(z.shape, -radius ** 2, dtype=complex)
    zs = np.where(inside, 1.0, z)
    anti = np.where(inside, -0.5 * np.conj(z) ** 2,
                    radius ** 4 / (2.0 * zs ** 2) - np.conj(z) * radius ** 2 / zs)
    return lin, anti


def disk_log_potential(points, radius: float) -> np.ndarray:
    """Logarithmic potential of the indicator of ``|w| <= radius``."""
    r = np.abs(_points(points))
    inside = (r ** 2 - radius ** 2) / 4.0 + 0.5 * radius ** 2 * math.log(radius)
    with np.errstate(divide="ignore"):
        outside = 0.5 * radius ** 2 * np.log(np.where(r > 0, r, 1.0))
    return np.where(r <= radius, inside, outside)


def source_gradients(g: Field):
    """Finite-difference ``d/dw`` and ``d/d wbar`` of a source, zero off its support."""
    grid = g.grid
    vals = np.asarray(g.values, dtype=complex)
    a = np.nan_to_num(dz_fd(grid, vals))
    b = np.nan_to_num(dbar_fd(grid, vals))
    mask = grid.inside(g.support_radius)
    return np.where(mask, a, 0.0), np.where(mask, b, 0.0)


def pompeiu_transform(g: Field, points, grad=None) -> np.ndarray:
    """``T_g(z) = (1/pi) int g(w) dm(w) / (z - w)`` at arbitrary points.

    The value of ``g`` at the nearest node is subtracted and restored
    through the closed-form transform of the source disk.  ``grad`` may
    supply per-point ``(d g/dw, d g/d wbar)`` to subtract the linear Taylor
    term as well, which raises the quadrature order at on-grid targets.
    """
    grid, zs, ws, gs = _sources(g)
    z = _points(points)
    gs = gs.astype(complex)
    s = _nearest_source_values(grid, gs, z)
    rho = grid.support_radius
    if grad is None:
        acc = kernels.cauchy_sum(z, zs, gs, ws, s)
        return acc / np.pi + s * disk_cauchy(z, rho)
    a, b = (np.asarray(x, dtype=complex).ravel() for x in grad)
    acc = kernels.cauchy_sum(z, zs, gs, ws, s, a, b)
    lin, anti = disk_cauchy_linear(z, rho)
    return acc / np.pi + s * disk_cauchy(z, rho) + a * lin + b * anti


def pompeiu_on_grid(g: Field) -> np.ndarray:
    """Pompeiu transform at every grid node, shape ``grid.shape``.

    Uses ring-wise mode integration (:mod:`vekuabvp.ringquad`), which is
    fourth-order accurate and smooth from node to node, so finite
    differences of the result are reliable.
    """
    _sources(g)
    return RingQuadrature.for_grid(g.grid).pompeiu(g.values)


def boundary_theta_derivative(g: Field, thetas) -> np.ndarray:
    """``d/dtheta T_g(e^{i theta}) = (zeta / (pi i)) int g dm / (zeta - w)^2``."""
    grid, zs, ws, gs = _sources(g)
    if g.support_radius >= 1.0 - 1e-6:
        raise TransformError("support touches the boundary")
    zeta = np.exp(1j * np.asarray(thetas, dtype=float))
    acc = kernels.cauchy2_sum(zeta, zs, gs.astype(complex), ws)
    return zeta * acc / (np.pi * 1j)


def newtonian_potential(G: Field, points) -> np.ndarray:
    """``N_G(z) = (1/2 pi) int ln|z - w| G(w) dm(w)`` at arbitrary points."""
    grid, zs, ws, gs = _sources(G)
    if np.iscomplexobj(gs):
        raise TransformError("newtonian_potential needs a real source")
    z = _points(points)
    s = _nearest_source_values(grid, gs, z)
    acc = kernels.log_sum(z, zs, gs, ws, s)
    return acc / TWO_PI + s * disk_log_potential(z, grid.support_radius)


def newtonian_on_grid(G: Field) -> np.ndarray:
    """Newtonian potential at every grid node (ring-wise mode integration)."""
    _, _, _, gs = _sources(G)
    if np.iscomplexobj(gs):
        raise TransformError("newtonian_potential needs a real source")
    return RingQuadrature.for_grid(G.grid).newtonian(G.values)


# ------------------------------------------------------------ boundary side

def _horner(coef: np.ndarray, z: np.ndarray) -> np.ndarray:
    """``sum_{k>=1} coef[k-1] z^k``."""
    out = np.zeros_like(z)
    for c in coef[::-1]:
        out = (out + c) * z
    return out


def positive_modes(samples: np.ndarray) -> np.ndarray:
    """Positive-frequency coefficients ``c_1..c_{n/2}`` of the trig interpolant.

    The Nyquist coefficient is halved (symmetric split between +-n/2).
    """
    v = np.asarray(samples)
    n = v.shape[0]
    c = np.fft.fft(v) / n
    kmax = n // 2
    pos = c[1:kmax + 1].copy()
    if n % 2 == 0:
        pos[-1] *= 0.5
    return pos


def _series_terms(r: float) -> int:
    r = min(max(r, 1e-3), SERIES_RADIUS)
    return int(math.ceil(math.log(_SERIES_TOL * (1 - r)) / math.log(r))) + 1


def _panel_schwartz(measure: SingularMeasure, z: np.ndarray) -> np.ndarray:
    """``(1/2 pi) int (zeta+z)/(zeta-z) d mu`` by exact integration over each piece."""
    a, ell, m = measure.intervals()
    za = np.exp(1j * a)
    zb = np.exp(1j * (a + ell))
    dens = m / ell
    out = np.zeros(z.shape, dtype=complex)
    step = max(1, 2_000_000 // a.size)
    for start in range(0, z.size, step):
        zz = z[start:start + step, None]
        w = (zb - za)[None, :] / (za[None, :] - zz)
        re = 0.5 * np.log1p(2.0 * w.real + (w.real ** 2 + w.imag ** 2))
        im = np.arctan2(w.imag, 1.0 + w.real)
        # arg(zeta - z) increases along the arc for z inside the disk
        im = np.where(im < 0, im + TWO_PI, im)
        integral = -ell[None, :] - 2j * (re + 1j * im)
        out[start:start + step] = integral @ dens / TWO_PI
    return out


def measure_schwartz(measure: SingularMeasure, points) -> np.ndarray:
    """Schwartz integral of a singular measure (no endpoint correction)."""
    z = _points(points)
    out = np.empty_like(z)
    near = np.abs(z) > SERIES_RADIUS
    if np.any(~near):
        zi = z[~near]
        K = _series_terms(float(np.max(np.abs(zi))))
        k = np.arange(0, K + 1)
        mu = measure.fourier(k) / TWO_PI
        out[~near] = mu[0] + 2.0 * _horner(mu[1:], zi)
    if np.any(near):
        out[near] = _panel_schwartz(measure, z[near])
    return out


@dataclass(frozen=True)
class SchwartzParts:
    """Pieces of an antiderivative path's Schwartz integral.

    ``coef`` are power-series coefficients (from ``z^1``) of the periodic
    part, ``drift`` the mean slope, ``singular`` the symbolic terms and
    ``jump`` the total endpoint mismatch handled as a point mass at 1.
    """

    coef: np.ndarray
    drift: complex
    singular: tuple
    jump: complex


def schwartz_parts(path: AntiderivativePath) -> SchwartzParts:
    """Series, drift and singular terms of ``S_Phi``.

    When the path carries its derivative samples the series comes from
    them directly: the Nyquist mode of ``Phi'`` vanishes at the nodes of
    ``Phi`` and would otherwise be lost, which matters for weights with
    integrable singularities.
    """
    if path.derivative_signal is not None:
        f = np.asarray(path.derivative_signal.values)
        return SchwartzParts(2.0 * positive_modes(f), np.mean(f), tuple(path.singular_part), path.jump())
    b = np.asarray(path.base)
    drift = (b[-1] - b[0]) / TWO_PI
    per = b[:-1] - drift * path.nodes[:-1]
    pos = positive_modes(per)
    k = np.arange(1, pos.size + 1)
    return SchwartzParts(2j * k * pos, drift, tuple(path.singular_part), path.jump())


def point_mass_kernel(z) -> np.ndarray:
    """``(1/2 pi) (1 + z) / (1 - z)``: Schwartz integral of a unit mass at 1."""
    return (1.0 + z) / (1.0 - z) / TWO_PI


def schwartz_integral(path: AntiderivativePath, points, r_max: float | None = None) -> np.ndarray:
    """``S_Phi(z) = (z / pi) oint Phi(zeta) / (zeta - z)^2 d zeta``.

    Evaluated as the Schwartz-Stieltjes integral of ``d Phi`` over the
    periodic extension, i.e. the endpoint mismatch acts as a point mass at
    ``zeta = 1``.
    """
    z = _points(points)
    if r_max is not None and np.any(np.abs(z) > r_max * (1 + 1e-12)):
        raise TransformError("evaluation point outside the r_max disk")
    if np.any(np.abs(z) >= 1.0):
        raise TransformError("schwartz_integral needs points inside the unit disk")
    return eval_schwartz_parts(schwartz_parts(path), z)


def eval_schwartz_parts(parts: SchwartzParts, z: np.ndarray, singular_values: dict | None = None) -> np.ndarray:
    """Evaluate :class:`SchwartzParts` at ``z``.

    ``singular_values`` may map a measure to its precomputed
    :func:`measure_schwartz` values at the same ``z``.
    """
    out = _horner(parts.coef, z) + parts.drift
    for c, mu in parts.singular:
        if singular_values is not None and mu in singular_values:
            s = singular_values[mu]
        else:
            s = measure_schwartz(mu, z)
        out = out + c * s
    if parts.jump != 0:
        out = out - parts.jump * point_mass_kernel(z)
    return out


def poisson_integral(phi: BoundarySignal, points) -> np.ndarray:
    """Poisson average of the trigonometric interpolant of ``phi``.

    Equal to the trapezoid-rule Poisson average wherever that converges and
    still accurate near the circle.
    """
    v = np.asarray(phi.values)
    if np.iscomplexobj(v):
        raise TransformError("poisson_integral needs a real signal")
    z = _points(points)
    if np.any(np.abs(z) >= 1.0):
        raise TransformError("poisson_integral needs points inside the unit disk")
    mean = float(np.mean(v))
    return mean + 2.0 * _horner(positive_modes(v), z).real


def poisson_trapezoid(phi: BoundarySignal, points) -> np.ndarray:
    """Direct trapezoid-rule Poisson average (reference implementation)."""
    v = np.asarray(phi.values, dtype=float)
    z = _points(points)
    r = np.abs(z)[:, None]
    th = np.angle(z)[:, None]
    t = phi.thetas[None, :]
    ker = (1 - r ** 2) / (1 - 2 * r * np.cos(th - t) + r ** 2)
    return ker @ v / v.size


def schwartz_trapezoid(base: np.ndarray, points) -> np.ndarray:
    """Trapezoid rule for ``(z/pi) oint Phi / (zeta - z)^2 d zeta`` on periodic samples."""
    b = np.asarray(base)
    n = b.shape[0]
    t = TWO_PI * np.arange(n) / n
    zeta = np.exp(1j * t)[None, :]
    z = _points(points)[:, None]
    integrand = b[None, :] / (zeta - z) ** 2 * 1j * zeta
    return (z[:, 0] / np.pi) * integrand.sum(axis=1) * (TWO_PI / n)


# ------------------------------------------------------------------ bounds

@dataclass(frozen=True)
class TransformBounds:
    """Empirical constants for ``|T_g| <= m1 ||g||_p`` and its Holder modulus."""

    m1: float
    m2: float
    p: float
    rho: float

    @property
    def alpha(self) -> float:
        return (self.p - 2.0) / self.p

    @property
    def c_rho(self) -> float:
        return 3.0 / (1.0 - self.rho) ** 2

    @property
    def c_rho_cap(self) -> float:
        return 3.0 * np.pi / (1.0 - self.rho) ** 2


def random_source(grid: PolarGrid, rng: np.random.Generator, rho: float | None = None, modes: int = 4) -> Field:
    """A smooth random complex source supported in ``|z| <= rho``."""
    rho = grid.support_radius if rho is None else rho
    z = grid.nodes
    r = np.abs(z) / rho
    env = np.clip(1.0 - r ** 2, 0.0, None) ** 3
    vals = np.zeros(grid.shape, dtype=complex)
    for _ in range(modes):
        c = rng.normal() + 1j * rng.normal()
        kx, ky = rng.integers(-3, 4, size=2)
        vals += c * np.exp(1j * (kx * z.real + ky * z.imag) * 2.0)
    return Field.from_function(grid, lambda _: vals * env, support_radius=rho)


def measure_transform_bounds(grid: PolarGrid, p: float = 4.0, n_sources: int = 12,
                             n_pairs: int = 200, seed: int = 0) -> TransformBounds:
    """Estimate ``M1``, ``M2`` over a randomized family of sources."""
    if p <= 2:
        raise TransformError("bounds need p > 2")
    rng = np.random.default_rng(seed)
    alpha = (p - 2.0) / p
    m1 = m2 = 0.0
    for _ in range(n_sources):
        g = random_source(grid, rng)
        nrm = lp_norm(g, p)
        pts = np.sqrt(rng.uniform(0, 1, n_pairs)) * np.exp(1j * rng.uniform(0, TWO_PI, n_pairs))
        pts2 = pts + 0.05 * (rng.normal(size=n_pairs) + 1j * rng.normal(size=n_pairs))
        pts2 = pts2 / np.maximum(1.0, np.abs(pts2))
        t1 = pompeiu_transform(g, pts)
        t2 = pompeiu_transform(g, pts2)
        m1 = max(m1, float(np.max(np.abs(t1))) / nrm)
        dz = np.abs(pts - pts2)
        ok = dz > 0
        m2 = max(m2, float(np.max(np.abs(t1 - t2)[ok] / dz[ok] ** alpha)) / nrm)
    return TransformBounds(m1, m2, p, grid.support_radius)
