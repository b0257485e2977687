"""The Poincare operator ``P*_G = N_G + gamma`` and directional derivatives.

``gamma`` is the real part of a primitive of the analytic function
``C = H*_{G/2} - T_{G/2} = A (S_Phi - S_{Phi_{G/2}})`` for the Hilbert
problem with ``lambda = conj(nu)``, normalized by ``gamma(0) = 0``.  Then
``d_z U = H*_{G/2} / 2`` (because ``d_z N_G = T_G / 4``), so
``dU/dnu = Re(nu H*_{G/2})`` and the Poincare condition reduces to the
Hilbert one.

Primitives are integrated from 0 along rays with composite
Gauss-Legendre panels.  On a fixed point set, ``C`` is an affine function of
the few parameters of ``S_{Phi_g}`` (power-series coefficients, drift,
singular coefficients, endpoint jump), so the ray integrals of each basis
function are computed once and ``gamma`` becomes a matrix-vector product.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from .boundarydata import TWO_PI, AntiderivativePath
from .diskgrid import BoundarySignal, Field, GridError, PolarGrid, UnimodularSignal, dz_fd, interpolate_bilinear
from .hilbert import HilbertError, HilbertOperator, HilbertProblem, SingularConfig, multiplier
from .transforms import (
    eval_schwartz_parts,
    measure_schwartz,
    newtonian_on_grid,
    newtonian_potential,
    point_mass_kernel,
    schwartz_parts,
)

GRID_GL_ORDER = 8
POINT_GL_ORDER = 16


class PoincareError(ValueError):
    pass


@dataclass(frozen=True)
class PoincareProblem:
    """Direction field ``nu``, target values ``phi`` and the Hilbert problem with ``lambda = conj(nu)``."""

    nu: UnimodularSignal
    phi: BoundarySignal
    closure: Optional[object] = "cantor"
    singular: SingularConfig = field(default_factory=SingularConfig)
    hilbert_sub: HilbertProblem = field(init=False, repr=False)

    def __post_init__(self):
        sub = HilbertProblem(self.nu.conj, self.phi, closure=self.closure, singular=self.singular)
        object.__setattr__(self, "hilbert_sub", sub)

    @property
    def n_theta(self) -> int:
        return self.nu.n_theta

    @property
    def thetas(self) -> np.ndarray:
        return self.nu.thetas

    def normal_positivity(self) -> np.ndarray:
        """``Re{n conj(nu)}`` with the inner normal ``n = -e^{i theta}``."""
        return np.real(-np.exp(1j * self.thetas) * np.conj(self.nu.values))


def inner_normal(n_theta: int) -> UnimodularSignal:
    th = TWO_PI * np.arange(n_theta) / n_theta
    return UnimodularSignal(-np.exp(1j * th))


def neumann_problem(phi: BoundarySignal, G: Optional[Field] = None, closure="cantor",
                    singular: Optional[SingularConfig] = None) -> PoincareProblem:
    """Poincare problem with ``nu`` the inner normal ``-e^{i theta}``.

    ``G`` is accepted for signature symmetry with the solver; the problem
    itself only depends on the boundary data.
    """
    if G is not None and G.grid.n_theta != phi.n_theta:
        raise PoincareError("source grid and phi have different n_theta")
    return PoincareProblem(inner_normal(phi.n_theta), phi, closure=closure,
                           singular=singular if singular is not None else SingularConfig())


def _half_source(G: Field) -> Field:
    if np.iscomplexobj(G.values):
        raise PoincareError("Poisson source must be real")
    return Field(G.grid, 0.5 * G.values.astype(complex), G.support_radius)


# ------------------------------------------------------------- quadrature

def _ray_panels(grid: PolarGrid, order: int = GRID_GL_ORDER):
    """GL nodes ``t`` and weights per panel ``[0, r_0], [r_0, r_1], ...``."""
    x, w = leggauss(order)
    bps = np.concatenate([[0.0], grid.radii])
    a, b = bps[:-1, None], bps[1:, None]
    return 0.5 * (b - a) * x[None, :] + 0.5 * (a + b), 0.5 * (b - a) * w[None, :]


def radial_rule(z: complex, order: int = POINT_GL_ORDER):
    """GL nodes and weights (in ``dxi``) for the segment ``[0, z]``.

    Panels shrink geometrically toward ``z`` so that the integrand's
    nearest singularity (on the unit circle) stays several panel widths
    away.
    """
    r = abs(z)
    if r == 0.0:
        return np.zeros(0, dtype=complex), np.zeros(0, dtype=complex)
    gap = max(1.0 - r, 1e-12)
    bps = [0.0]
    while r - bps[-1] > 2.0 * gap:
        bps.append(bps[-1] + 0.5 * (r - bps[-1]))
    bps.append(r)
    x, w = leggauss(order)
    a, b = np.array(bps[:-1])[:, None], np.array(bps[1:])[:, None]
    t = (0.5 * (b - a) * x[None, :] + 0.5 * (a + b)).ravel()
    wt = (0.5 * (b - a) * w[None, :]).ravel()
    u = z / r
    return t * u, wt * u


def segment_rule(z0: complex, z1: complex, order: int = POINT_GL_ORDER, panels: int = 1):
    """Composite GL nodes and complex weights for the straight segment ``[z0, z1]``."""
    x, w = leggauss(order)
    s = np.linspace(0.0, 1.0, panels + 1)
    a, b = s[:-1, None], s[1:, None]
    t = (0.5 * (b - a) * x[None, :] + 0.5 * (a + b)).ravel()
    wt = (0.5 * (b - a) * w[None, :]).ravel()
    return z0 + t * (z1 - z0), wt * (z1 - z0)


def line_integral(func, z, via=None, order: int = POINT_GL_ORDER) -> complex:
    """``int_0^z func(xi) dxi`` along the ray, or along ``0 -> via -> z``."""
    if via is None:
        xi, w = radial_rule(complex(z), order)
        return complex(np.sum(func(xi) * w)) if xi.size else 0j
    tot = 0j
    for a, b in ((0j, complex(via)), (complex(via), complex(z))):
        panels = max(1, int(np.ceil(abs(b - a) / max(1.0 - max(abs(a), abs(b)), 1e-3) / 4)))
        xi, w = segment_rule(a, b, order, panels)
        tot += np.sum(func(xi) * w)
    return complex(tot)


# --------------------------------------------------------------- operator

class PoincareOperator:
    """``G -> P*_G`` on the grid (and at optional extra points).

    Parameters
    ----------
    problem : PoincareProblem
    grid : PolarGrid
    points : array_like, optional
        Extra points inside the unit disk where ``U`` itself is wanted.
    derivative_points : array_like, optional
        Extra points where only ``d_z U`` is wanted (no primitive needed).
    """

    def __init__(self, problem: PoincareProblem, grid: PolarGrid, points=None, derivative_points=None):
        self.problem = problem
        self.grid = grid
        self.points = None if points is None else np.atleast_1d(np.asarray(points, dtype=complex))
        self.derivative_points = (None if derivative_points is None
                                  else np.atleast_1d(np.asarray(derivative_points, dtype=complex)))
        self.hop = HilbertOperator(problem.hilbert_sub, grid, self.derivative_points)
        self.measures = self.hop.g_measures
        self.n_modes = problem.n_theta // 2
        self._grid_basis = self._grid_primitives()
        self._point_basis = None
        if self.points is not None:
            self._point_basis = self._point_primitives(self.points)

    # basis: [xi^1 .. xi^K, 1, S_Phi, M_mu..., point mass], each times A
    def _basis(self, xi: np.ndarray) -> np.ndarray:
        A, rest = self._nonpolynomial(xi)
        return np.hstack([self._powers(A, xi), rest])

    def _nonpolynomial(self, xi: np.ndarray):
        p = self.problem.hilbert_sub
        A = multiplier(p.decomposition, xi)
        cols = [A, A * eval_schwartz_parts(schwartz_parts(p.Phi), xi)]
        cols += [A * measure_schwartz(mu, xi) for mu in self.measures]
        cols.append(A * point_mass_kernel(xi))
        return A, np.stack(cols, axis=1)

    def _powers(self, A: np.ndarray, xi: np.ndarray) -> np.ndarray:
        pw = np.cumprod(np.broadcast_to(xi[:, None], (xi.size, self.n_modes)), axis=1)
        return A[:, None] * pw

    def _grid_primitives(self) -> np.ndarray:
        grid = self.grid
        t, w = _ray_panels(grid)
        u = np.exp(1j * grid.thetas)
        xi = t[:, :, None] * u[None, None, :]
        A, rest = self._nonpolynomial(xi.ravel())
        A = A.reshape(xi.shape)
        rest = rest.reshape(xi.shape + (-1,))
        nb = self.n_modes + rest.shape[-1]
        out = np.empty((grid.n_r, grid.n_theta, nb), dtype=complex)
        for j in range(grid.n_theta):
            B = np.concatenate([self._powers(A[:, :, j].ravel(), xi[:, :, j].ravel()),
                                rest[:, :, j, :].reshape(-1, rest.shape[-1])], axis=1)
            B = B.reshape(t.shape + (nb,))
            out[:, j, :] = np.cumsum(np.einsum("iq,iqb->ib", w * u[j], B), axis=0)
        return out.reshape(-1, nb)

    def _point_primitives(self, z: np.ndarray) -> np.ndarray:
        """Basis primitives at arbitrary points; points sharing a ray share one cumulative rule."""
        if np.any(np.abs(z) >= 1.0):
            raise PoincareError("evaluation points must lie inside the unit disk")
        nb = self.n_modes + 3 + len(self.measures)
        out = np.zeros((z.size, nb), dtype=complex)
        angle = np.round(np.angle(z), 12)
        groups = {}
        for i, a in enumerate(angle):
            if z[i] != 0:
                groups.setdefault(a, []).append(i)
        batch, count = [], 0
        for a, idx in groups.items():
            batch.append(idx)
            count += 40 * len(idx)
            if count > 20000:
                self._ray_batch(z, batch, out)
                batch, count = [], 0
        if batch:
            self._ray_batch(z, batch, out)
        return out

    def _ray_batch(self, z, batch, out):
        xs, ws, seg_owner, rays = [], [], [], []
        nseg = 0
        for idx in batch:
            idx = sorted(idx, key=lambda i: abs(z[i]))
            radii = np.abs(z[idx])
            bps = [0.0]
            for r in radii:
                gap = max(1.0 - r, 1e-12)
                while r - bps[-1] > 2.0 * gap:
                    bps.append(bps[-1] + 0.5 * (r - bps[-1]))
                if r > bps[-1]:
                    bps.append(r)
            bps = np.array(bps)
            x, w = leggauss(POINT_GL_ORDER)
            a, b = bps[:-1, None], bps[1:, None]
            u = z[idx[0]] / abs(z[idx[0]])
            xs.append(((0.5 * (b - a) * x + 0.5 * (a + b)) * u).ravel())
            ws.append((0.5 * (b - a) * w * u).ravel())
            seg_owner.append(np.repeat(np.arange(nseg, nseg + bps.size - 1), POINT_GL_ORDER))
            rays.append((idx, radii, bps, nseg))
            nseg += bps.size - 1
        xi = np.concatenate(xs)
        B = self._basis(xi) * np.concatenate(ws)[:, None]
        seg = np.zeros((nseg, B.shape[1]), dtype=complex)
        np.add.at(seg, np.concatenate(seg_owner), B)
        for idx, radii, bps, s0 in rays:
            cum = np.cumsum(seg[s0:s0 + bps.size - 1], axis=0)
            pos = np.searchsorted(bps, radii) - 1
            out[idx] = cum[pos]

    def _weights(self, Phi_g: AntiderivativePath) -> np.ndarray:
        """Coefficients combining the basis primitives into ``int C``."""
        parts = schwartz_parts(Phi_g)
        nb = self.n_modes + 3 + len(self.measures)
        v = np.zeros(nb, dtype=complex)
        K = self.n_modes
        v[:parts.coef.size] = -parts.coef
        v[K] = -parts.drift
        v[K + 1] = 1.0
        for c, mu in parts.singular:
            if mu not in self.measures:
                raise HilbertError(f"unexpected singular term {mu!r}")
            v[K + 2 + self.measures.index(mu)] = -c
        v[-1] = parts.jump
        return v

    def gamma_from_Phi_g(self, Phi_g: AntiderivativePath, where: str = "grid") -> np.ndarray:
        basis = self._grid_basis if where == "grid" else self._point_basis
        if basis is None:
            raise PoincareError("no extra points were prepared")
        return np.real(basis @ self._weights(Phi_g))

    def Phi_g(self, G: Field) -> AntiderivativePath:
        return self.hop.Phi_g(_half_source(G))

    def gamma(self, G: Field, where: str = "grid") -> np.ndarray:
        g = self.gamma_from_Phi_g(self.Phi_g(G), where)
        return g.reshape(self.grid.shape) if where == "grid" else g

    def apply(self, G: Field):
        """Return ``(U on the grid, Phi_{G/2})``."""
        Phi_g = self.Phi_g(G)
        gam = self.gamma_from_Phi_g(Phi_g).reshape(self.grid.shape)
        return newtonian_on_grid(G) + gam, Phi_g

    def at_points(self, G: Field, Phi_g: Optional[AntiderivativePath] = None) -> np.ndarray:
        if Phi_g is None:
            Phi_g = self.Phi_g(G)
        return newtonian_potential(G, self.points) + self.gamma_from_Phi_g(Phi_g, "points")

    def dz_at_points(self, G: Field, Phi_g: Optional[AntiderivativePath] = None) -> np.ndarray:
        """``d_z U = H*_{G/2} / 2`` at the derivative points."""
        return 0.5 * self.hop.at_points(_half_source(G), Phi_g)


def build_gamma(problem: PoincareProblem, G: Field, points) -> np.ndarray:
    """``gamma = Re int_0^z (H*_{G/2} - T_{G/2}) dxi`` at arbitrary points (``gamma(0) = 0``)."""
    op = PoincareOperator(problem, G.grid, points)
    return op.gamma(G, "points")


def assemble_poincare(problem: PoincareProblem, G: Field, points) -> np.ndarray:
    """``U = N_G + gamma`` at arbitrary points inside the disk."""
    op = PoincareOperator(problem, G.grid, points)
    return op.at_points(G)


def poincare_on_grid(problem: PoincareProblem, G: Field) -> np.ndarray:
    return PoincareOperator(problem, G.grid).apply(G)[0]


def correction_function(problem: PoincareProblem, G: Field):
    """The analytic integrand ``C(xi) = A (S_Phi - S_{Phi_{G/2}})`` as a callable."""
    p = problem.hilbert_sub
    from .hilbert import build_Phi_g
    Phi_g = build_Phi_g(p, _half_source(G))
    parts_phi = schwartz_parts(p.Phi)
    parts_g = schwartz_parts(Phi_g)

    def C(xi):
        xi = np.atleast_1d(np.asarray(xi, dtype=complex))
        return multiplier(p.decomposition, xi) * (eval_schwartz_parts(parts_phi, xi) - eval_schwartz_parts(parts_g, xi))

    return C


def directional_derivative(U: Field, nu_point: complex, point: complex) -> float:
    """``2 Re(nu d_z U)`` at ``point`` with ``d_z U`` from grid finite differences."""
    nu_point = complex(nu_point)
    if abs(abs(nu_point) - 1.0) > 1e-12:
        raise PoincareError("direction must be a unit complex number")
    grid = U.grid
    d = dz_fd(grid, np.asarray(U.values, dtype=complex))
    valid_r = grid.radii[grid.n_r - 3]
    if abs(point) > valid_r:
        raise GridError("finite-difference stencil exits the grid")
    dz = interpolate_bilinear(Field(grid, d), [point])[0]
    return float(2.0 * np.real(nu_point * dz))
