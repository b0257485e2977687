"""Polar discretization of the unit disk, sampled fields and boundary signals.

The grid is a tensor product of a composite-midpoint radial rule and a
uniform (trapezoid) angular rule.  Radial layers are split between the
source support ``[0, rho]`` and the annulus ``(rho, r_max]``; the midpoint
rule integrates ``r dr`` exactly, so the cell weights reproduce the area of
any covered disk up to rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


class GridError(ValueError):
    """Parameter out of range for a grid, field or signal."""


@dataclass(frozen=True)
class PolarGrid:
    n_r: int
    n_theta: int
    r_max: float
    support_radius: float
    edges: np.ndarray = field(repr=False)

    @property
    def radii(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def thetas(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_theta) / self.n_theta

    @property
    def n_inner(self) -> int:
        """Number of radial layers inside the support radius."""
        return int(np.searchsorted(self.edges, self.support_radius * (1 + 1e-14), side="right") - 1)

    @property
    def dtheta(self) -> float:
        return 2.0 * np.pi / self.n_theta

    @property
    def shape(self) -> tuple:
        return (self.n_r, self.n_theta)

    @property
    def size(self) -> int:
        return self.n_r * self.n_theta

    @property
    def nodes(self) -> np.ndarray:
        """Complex node positions, shape ``(n_r, n_theta)``."""
        return self.radii[:, None] * np.exp(1j * self.thetas)[None, :]

    @property
    def cell_weights(self) -> np.ndarray:
        """Area weights ``r dr dtheta`` per node, shape ``(n_r, n_theta)``."""
        dr = np.diff(self.edges)
        w = self.radii * dr * self.dtheta
        return np.repeat(w[:, None], self.n_theta, axis=1)

    def inside(self, radius: float) -> np.ndarray:
        """Boolean mask of nodes with ``|z| <= radius``."""
        m = self.radii <= radius * (1 + 1e-14)
        return np.repeat(m[:, None], self.n_theta, axis=1)

    def source_nodes(self):
        """Nodes, weights and flat indices of the layers inside the support."""
        k = self.n_inner
        z = self.nodes[:k].ravel()
        w = self.cell_weights[:k].ravel()
        return z, w, np.arange(k * self.n_theta)

    def nearest_index(self, points: np.ndarray) -> tuple:
        """Radial and angular index of the grid node nearest to each point."""
        points = np.asarray(points, dtype=complex)
        r = np.abs(points)
        ir = np.clip(np.searchsorted(self.radii, r), 0, self.n_r - 1)
        lower = np.clip(ir - 1, 0, self.n_r - 1)
        pick_lower = np.abs(self.radii[lower] - r) < np.abs(self.radii[ir] - r)
        ir = np.where(pick_lower, lower, ir)
        th = np.mod(np.angle(points), 2 * np.pi)
        it = np.mod(np.rint(th / self.dtheta).astype(int), self.n_theta)
        return ir, it


def make_grid(n_r: int, n_theta: int, r_max: float, support_radius: float) -> PolarGrid:
    """Build a polar grid with at least half the layers inside the support.

    Raises
    ------
    GridError
        If ``n_r`` or ``n_theta`` is below 4 or the radii are out of order.
    """
    if int(n_r) < 4 or int(n_theta) < 4:
        raise GridError("parameter out of range: n_r and n_theta must be >= 4")
    if not (0.0 < support_radius <= r_max < 1.0):
        raise GridError("parameter out of range: need 0 < support_radius <= r_max < 1")
    n_r, n_theta = int(n_r), int(n_theta)
    if support_radius >= r_max:
        edges = np.linspace(0.0, r_max, n_r + 1)
    else:
        n_in = math.ceil(n_r / 2)
        n_out = n_r - n_in
        inner = np.linspace(0.0, support_radius, n_in + 1)
        outer = np.linspace(support_radius, r_max, n_out + 1)[1:]
        edges = np.concatenate([inner, outer])
    return PolarGrid(n_r, n_theta, float(r_max), float(support_radius), edges)


@dataclass(frozen=True)
class Field:
    """Real or complex samples on a :class:`PolarGrid`.

    If ``support_radius`` is set every node beyond it must hold an exact zero.
    """

    grid: PolarGrid
    values: np.ndarray
    support_radius: Optional[float] = None

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.shape != self.grid.shape:
            raise GridError(f"field shape {vals.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", vals)
        if self.support_radius is not None:
            outside = ~self.grid.inside(self.support_radius)
            if np.any(vals[outside] != 0):
                raise GridError("field has nonzero values outside its support radius")

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    @classmethod
    def from_function(cls, grid: PolarGrid, func: Callable, support_radius: Optional[float] = None):
        vals = np.asarray(func(grid.nodes))
        if vals.shape != grid.shape:
            vals = np.broadcast_to(vals, grid.shape).copy()
        if support_radius is not None:
            vals = np.where(grid.inside(support_radius), vals, 0)
        return cls(grid, vals, support_radius)

    def with_values(self, values) -> "Field":
        return Field(self.grid, values, self.support_radius)

    def __mul__(self, c):
        return self.with_values(self.values * c)

    __rmul__ = __mul__


RealField = Field
ComplexField = Field


def lp_norm(f: Field, p: float = 2.0) -> float:
    """Discrete L^p norm ``(sum |v|^p w)^(1/p)``; ``p = inf`` gives the sup norm."""
    if p < 1:
        raise GridError("lp_norm requires p >= 1")
    a = np.abs(f.values)
    if np.isinf(p):
        return float(a.max()) if a.size else 0.0
    if f.support_radius is not None:
        mask = f.grid.inside(f.support_radius)
        a, w = a[mask], f.grid.cell_weights[mask]
    else:
        w = f.grid.cell_weights
    amax = a.max() if a.size else 0.0
    if amax == 0:
        return 0.0
    # scaled to avoid overflow for large p
    return float(amax * np.sum((a / amax) ** p * w) ** (1.0 / p))


def area(grid: PolarGrid, radius: Optional[float] = None) -> float:
    """Sum of cell weights over the disk of the given radius (default: whole grid)."""
    w = grid.cell_weights
    if radius is not None:
        w = w[grid.inside(radius)]
    return float(np.sum(w))


def field_to_csv(f: Field, path) -> None:
    """Write ``r,theta,re_z,im_z,value_re,value_im`` rows, radial-major."""
    g = f.grid
    z = g.nodes
    rr = np.repeat(g.radii[:, None], g.n_theta, axis=1)
    tt = np.repeat(g.thetas[None, :], g.n_r, axis=0)
    v = np.asarray(f.values, dtype=complex)
    cols = [rr, tt, z.real, z.imag, v.real, v.imag]
    lines = ["r,theta,re_z,im_z,value_re,value_im"]
    flat = [c.ravel() for c in cols]
    for row in zip(*flat):
        lines.append(",".join(f"{x:.17g}" for x in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass(frozen=True)
class BoundarySignal:
    """Samples of a function on the unit circle at ``theta_j = 2 pi j / n``."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values).ravel())

    @property
    def n_theta(self) -> int:
        return self.values.shape[0]

    @property
    def thetas(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_theta) / self.n_theta

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)

    def check_size(self, n_theta: int) -> None:
        if self.n_theta != n_theta:
            raise GridError(f"signal has {self.n_theta} samples, expected {n_theta}")


class UnimodularSignal(BoundarySignal):
    """Complex boundary samples of modulus one (to 1e-12)."""

    def __post_init__(self):
        super().__post_init__()
        v = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", v)
        if np.any(np.abs(np.abs(v) - 1.0) > 1e-12):
            raise GridError("unimodular signal has samples off the unit circle")

    @property
    def conj(self) -> "UnimodularSignal":
        return UnimodularSignal(np.conj(self.values))


# ------------------------------------------------------- grid differencing

_STENCIL_HALF = 2  # five-point radial stencils


def _with_ghost(grid: PolarGrid, u: np.ndarray):
    """Prepend ghost layers at ``-r_1, -r_0`` (inner layers rotated by pi)."""
    if grid.n_theta % 2:
        raise GridError("finite differences through the origin need an even n_theta")
    k = _STENCIL_HALF
    ghosts = [np.roll(u[j], grid.n_theta // 2) for j in range(k - 1, -1, -1)]
    r = np.concatenate([-grid.radii[k - 1::-1], grid.radii])
    return r, np.vstack([np.array(ghosts), u])


def _fd_weights(x: np.ndarray, x0: float, order: int) -> np.ndarray:
    """Finite-difference weights for derivative ``order`` at ``x0`` on nodes ``x``."""
    m = x.size
    h = x - x0
    V = np.vander(h, m, increasing=True).T
    rhs = np.zeros(m)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(V, rhs)


def _theta_derivative(u: np.ndarray, order: int) -> np.ndarray:
    n = u.shape[-1]
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k_odd = k.copy()
        k_odd[n // 2] = 0.0
    else:
        k_odd = k
    mult = (1j * k_odd) ** order if order % 2 else (1j * k) ** order
    out = np.fft.ifft(np.fft.fft(u, axis=-1) * mult, axis=-1)
    return out if np.iscomplexobj(u) else out.real


def radial_derivatives(grid: PolarGrid, u: np.ndarray):
    """Five-point first and second radial derivatives.

    Returned arrays cover the layers that have a full stencil, i.e. all
    but the outermost two; see :data:`_STENCIL_HALF`.
    """
    k = _STENCIL_HALF
    r, v = _with_ghost(grid, np.asarray(u))
    n_out = grid.n_r - k
    d1 = np.empty((n_out,) + v.shape[1:], dtype=v.dtype)
    d2 = np.empty_like(d1)
    for i in range(n_out):
        c = i + k
        nodes = r[c - k:c + k + 1]
        w1 = _fd_weights(nodes, r[c], 1)
        w2 = _fd_weights(nodes, r[c], 2)
        d1[i] = w1 @ v[c - k:c + k + 1]
        d2[i] = w2 @ v[c - k:c + k + 1]
    return d1, d2


def dbar_fd(grid: PolarGrid, u: np.ndarray) -> np.ndarray:
    """Finite-difference ``d/d zbar``; layers without a full stencil are NaN."""
    u = np.asarray(u, dtype=complex)
    d1, _ = radial_derivatives(grid, u)
    m = d1.shape[0]
    ut = _theta_derivative(u, 1)[:m]
    r = grid.radii[:m, None]
    e = np.exp(1j * grid.thetas)[None, :]
    out = np.full(grid.shape, np.nan + 0j)
    out[:m] = 0.5 * e * (d1 + 1j * ut / r)
    return out


def dz_fd(grid: PolarGrid, u: np.ndarray) -> np.ndarray:
    """Finite-difference ``d/dz``; layers without a full stencil are NaN."""
    u = np.asarray(u, dtype=complex)
    d1, _ = radial_derivatives(grid, u)
    m = d1.shape[0]
    ut = _theta_derivative(u, 1)[:m]
    r = grid.radii[:m, None]
    e = np.exp(-1j * grid.thetas)[None, :]
    out = np.full(grid.shape, np.nan + 0j)
    out[:m] = 0.5 * e * (d1 - 1j * ut / r)
    return out


def laplacian_fd(grid: PolarGrid, u: np.ndarray) -> np.ndarray:
    """Finite-difference Laplacian in polar form; layers without a full stencil are NaN."""
    u = np.asarray(u)
    d1, d2 = radial_derivatives(grid, u)
    m = d1.shape[0]
    utt = _theta_derivative(u, 2)[:m]
    r = grid.radii[:m, None]
    out = np.full(grid.shape, np.nan, dtype=np.result_type(u.dtype, float))
    out[:m] = d2 + d1 / r + utt / r ** 2
    return out


def interpolate_bilinear(f: Field, points) -> np.ndarray:
    """Bilinear interpolation in ``(r, theta)``; points must lie within the grid radii."""
    g = f.grid
    z = np.atleast_1d(np.asarray(points, dtype=complex))
    r = np.abs(z)
    if np.any(r > g.radii[-1] * (1 + 1e-12)):
        raise GridError("interpolation point outside the grid")
    rr, v = _with_ghost(g, np.asarray(f.values))
    i = np.clip(np.searchsorted(rr, r, side="right") - 1, 0, len(rr) - 2)
    tr = (r - rr[i]) / (rr[i + 1] - rr[i])
    th = np.mod(np.angle(z), 2 * np.pi) / g.dtheta
    j = np.floor(th).astype(int) % g.n_theta
    tt = th - np.floor(th)
    j1 = (j + 1) % g.n_theta
    lo = (1 - tt) * v[i, j] + tt * v[i, j1]
    hi = (1 - tt) * v[i + 1, j] + tt * v[i + 1, j1]
    return (1 - tr) * lo + tr * hi


def interpolate_spectral(f: Field, points, order: int = 6) -> np.ndarray:
    """Trigonometric interpolation in ``theta`` and Lagrange interpolation in ``r``.

    Unlike :func:`interpolate_bilinear` the result is smooth in the point
    location, so finite differences of interpolated values are meaningful.
    Points must lie inside the radius of layer ``n_r - 2``.

    Parameters
    ----------
    f : Field
        Field to interpolate.
    points : array_like of complex
        Evaluation points.
    order : int
        Number of radial nodes in the Lagrange stencil (even, 2 to 6).
        Second differences of the interpolant on a different grid amplify the
        radial interpolation error by the inverse square of that grid's
        spacing, so the default uses the widest stencil the ghost layers allow.
    """
    if order not in (2, 4, 6):
        raise GridError("radial interpolation order must be 2, 4 or 6")
    g = f.grid
    z = np.atleast_1d(np.asarray(points, dtype=complex))
    r = np.abs(z)
    if np.any(r > g.radii[-2] * (1 + 1e-12)):
        raise GridError("interpolation point outside the grid")
    rr, v = _with_ghost(g, np.asarray(f.values))
    n = g.n_theta
    c = np.fft.fft(v, axis=1) / n
    k = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0:
        c[:, n // 2] *= 0.5
    lo, hi = order // 2 - 1, order // 2
    i = np.searchsorted(rr, r, side="right") - 1
    i = np.clip(i, max(lo, 1), len(rr) - 1 - hi)
    th = np.angle(z)
    phase = np.exp(1j * np.outer(th, k))
    nyq = np.zeros(z.size, dtype=complex)
    out = np.zeros(z.size, dtype=complex)
    offsets = range(-lo, hi + 1)
    for s in offsets:
        row = i + s
        w = np.ones(z.size)
        for t in offsets:
            if t != s:
                w *= (r - rr[i + t]) / (rr[row] - rr[i + t])
        vals = np.sum(c[row] * phase, axis=1)
        if n % 2 == 0:
            nyq = c[row, n // 2] * np.exp(1j * (n // 2) * th)
        out += w * (vals + nyq)
    if not np.iscomplexobj(f.values):
        return out.real
    return out
