"""Transfer of boundary problems between a Jordan domain and the unit disk.

A :class:`ConformalChart` supplies ``C: disk -> domain`` and ``C'`` in
closed form.  With ``f = f~ o c`` (``c = C^{-1}``) the equations and data
transform as

* Vekua: ``h~ = (h o C) conj(C')``, ``lambda~ = lambda o C``;
* Poisson: ``H~ = |C'|^2 (H o C)``;
* Poincare: ``nu~ = (nu o C) conj(C') / |C'|`` and
  ``phi~ = (phi o C) |C'|`` on the circle, so that
  ``d U~ / d nu~ = |C'| (dU/dnu) o C``.  For the inner normal of the domain
  this gives ``nu~ = -zeta`` (the disk's inner normal).

Boundary data on the domain are functions of the normalized arc-length
parameter ``s in [0, 2 pi)`` measured from ``C(1)``, or of the boundary point.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.spatial import cKDTree

from .boundarydata import TWO_PI
from .diskgrid import BoundarySignal, Field, GridError, PolarGrid, UnimodularSignal, interpolate_spectral

BOUNDARY_EPS = 1e-6
NEWTON_STEPS = 50
UNIVALENCE_SAMPLES = 10_000


class ChartError(ValueError):
    pass


def _sunflower(n: int, radius: float) -> np.ndarray:
    """Quasi-uniform points in the disk of the given radius."""
    k = np.arange(n) + 0.5
    return radius * np.sqrt(k / n) * np.exp(1j * np.pi * (3.0 - np.sqrt(5.0)) * k)


@dataclass(frozen=True)
class ConformalChart:
    """Closed-form conformal map from the unit disk onto a domain.

    Presets (``spec`` grammar):

    * ``identity``;
    * ``affine:a_re,a_im,b_re,b_im`` for ``C(z) = a z + b`` (``a != 0``);
    * ``poly:c1_re,c1_im,c2_re,c2_im,...`` for ``C(z) = sum_k c_k z^k``
      (``c1 != 0``; univalence is checked numerically, e.g. ``|c2| < |c1| / 2``
      for a quadratic);
    * ``joukowski:t`` for ``C(z) = z / (1 - t z)^2``, a scaled Koebe map,
      univalent with a smooth boundary for real ``0 <= t < 1`` (recommended
      ``t <= 0.5``).
    """

    spec: str = "identity"
    r_max: float = 0.95

    def __post_init__(self):
        kind, coeffs, t = self._parse()
        object.__setattr__(self, "_kind", kind)
        object.__setattr__(self, "_coeffs", coeffs)
        object.__setattr__(self, "_t", t)
        self.check()

    def _parse(self):
        s = str(self.spec).strip()
        head, _, rest = s.partition(":")
        try:
            nums = [float(x) for x in rest.split(",")] if rest else []
        except ValueError as exc:
            raise ChartError(f"bad chart spec {s!r}") from exc
        if head == "identity" and not rest:
            return "poly", np.array([0.0, 1.0], dtype=complex), 0.0
        if head == "affine":
            if len(nums) != 4:
                raise ChartError("affine chart needs a_re,a_im,b_re,b_im")
            a, b = complex(nums[0], nums[1]), complex(nums[2], nums[3])
            if a == 0:
                raise ChartError("affine chart needs a != 0")
            return "poly", np.array([b, a]), 0.0
        if head == "poly":
            if len(nums) < 2 or len(nums) % 2:
                raise ChartError("poly chart needs re,im pairs")
            c = np.array([complex(nums[i], nums[i + 1]) for i in range(0, len(nums), 2)])
            if c[0] == 0:
                raise ChartError("poly chart needs c1 != 0")
            return "poly", np.concatenate([[0.0], c]), 0.0
        if head == "joukowski":
            if len(nums) != 1 or not 0.0 <= nums[0] < 1.0:
                raise ChartError("joukowski chart needs 0 <= t < 1")
            return "koebe", None, nums[0]
        raise ChartError(f"unknown chart spec {s!r}")

    # ------------------------------------------------------------ map
    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self._kind == "poly":
            return np.polynomial.polynomial.polyval(z, self._coeffs)
        return z / (1.0 - self._t * z) ** 2

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        if self._kind == "poly":
            return np.polynomial.polynomial.polyval(z, np.polynomial.polynomial.polyder(self._coeffs))
        t = self._t
        return (1.0 + t * z) / (1.0 - t * z) ** 3

    @property
    def is_identity(self) -> bool:
        return self._kind == "poly" and self._coeffs.size == 2 and self._coeffs[0] == 0 and self._coeffs[1] == 1

    # ------------------------------------------------------ validation
    def check(self, n: int = UNIVALENCE_SAMPLES):
        """Univalence and ``C' != 0`` on quasi-uniform samples of the closed ``r_max`` disk."""
        z = np.concatenate([_sunflower(n, self.r_max), self.r_max * np.exp(1j * TWO_PI * np.arange(512) / 512)])
        if np.any(np.abs(self.derivative(z)) < 1e-12):
            raise ChartError("chart derivative vanishes on the sample mesh")
        # argument principle: C' has no zeros inside the closed unit disk
        zc = np.exp(1j * TWO_PI * np.arange(4096) / 4096)
        dc = self.derivative(zc)
        if np.any(np.abs(dc) < 1e-12) or abs(np.sum(np.angle(np.roll(dc, -1) / dc))) > 1e-6:
            raise ChartError("chart derivative vanishes inside the disk")
        w = self(z)
        pts = np.column_stack([w.real, w.imag])
        pairs = cKDTree(pts).query_pairs(1e-10)
        if pairs:
            raise ChartError("chart is not univalent on the sample mesh")
        # boundary curve must be simple: consecutive images advance, no self-crossing
        zb = np.exp(1j * TWO_PI * np.arange(2048) / 2048)
        wind = np.sum(np.angle(np.roll(self.derivative(zb) * zb, -1) / (self.derivative(zb) * zb)))
        if abs(wind - TWO_PI) > 1e-6:
            raise ChartError("boundary tangent does not turn exactly once")

    # --------------------------------------------------------- inverse
    def inverse(self, w, seeds: int = 4096) -> np.ndarray:
        """``c(w) = C^{-1}(w)`` by damped Newton steps seeded from the nearest sample image."""
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        if self.is_identity:
            return w.copy()
        mesh = np.concatenate([_sunflower(seeds, 0.999), 0.999 * np.exp(1j * TWO_PI * np.arange(512) / 512)])
        img = self(mesh)
        _, idx = cKDTree(np.column_stack([img.real, img.imag])).query(np.column_stack([w.real, w.imag]))
        z = mesh[idx]
        done = np.zeros(w.size, dtype=bool)
        for _ in range(NEWTON_STEPS):
            r = self(z) - w
            done = np.abs(r) <= 1e-13 * (1.0 + np.abs(w))
            if done.all():
                break
            step = r / self.derivative(z)
            lam = np.ones(w.size)
            for _ in range(30):
                trial = z - lam * step
                bad = (np.abs(trial) >= 1.0) | (np.abs(self(trial) - w) > np.abs(r))
                bad &= ~done
                if not bad.any():
                    break
                lam = np.where(bad, 0.5 * lam, lam)
            z = np.where(done, z, z - lam * step)
        r = np.abs(self(z) - w)
        if np.any(r > 1e-10 * (1.0 + np.abs(w))):
            raise ChartError("inverse map did not converge (point outside the charted region?)")
        return z

    # -------------------------------------------------------- boundary
    def boundary_points(self, thetas, eps: float = BOUNDARY_EPS) -> np.ndarray:
        """``c_*^{-1}(theta)`` approximated by ``C((1 - eps) e^{i theta})``."""
        return self((1.0 - eps) * np.exp(1j * np.asarray(thetas, dtype=float)))

    def arclength_parameter(self, thetas, n_fine: int = 8192) -> np.ndarray:
        """Normalized arc length ``s(theta) in [0, 2 pi)`` of ``C(e^{i theta})`` from ``C(1)``."""
        tf = TWO_PI * np.arange(n_fine + 1) / n_fine
        speed = np.abs(self.derivative(np.exp(1j * tf)))
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]))]) * (TWO_PI / n_fine)
        return TWO_PI * np.interp(np.mod(thetas, TWO_PI), tf, cum) / cum[-1]

    def cone_deviation(self, theta0: float, distance: float = 1e-3, aperture_deg: float = 30.0,
                       rays: int = 8) -> float:
        """Largest angle change (degrees) of cone rays at ``e^{i theta0}`` under the chart.

        Ray directions at the circle point are measured from the inner
        normal; their images are measured from the image inner normal.
        """
        zeta = np.exp(1j * theta0)
        psi = np.deg2rad(np.linspace(-aperture_deg, aperture_deg, rays))
        pts = zeta - distance * zeta * np.exp(1j * psi)
        base = self(zeta)
        dC = self.derivative(zeta)
        n_img = -zeta * dC / abs(dC)
        ang = np.angle((self(pts) - base) / n_img)
        return float(np.rad2deg(np.max(np.abs(ang - psi))))


def parse_chart(spec, r_max: float = 0.95) -> ConformalChart:
    if isinstance(spec, ConformalChart):
        return spec
    return ConformalChart(str(spec or "identity"), r_max)


def _support_radius(grid: PolarGrid, values: np.ndarray, support_radius: Optional[float]) -> float:
    nz = np.abs(values) > 0
    rmax = float(np.max(np.abs(grid.nodes[nz]))) if nz.any() else 0.0
    rho = grid.support_radius if support_radius is None else support_radius
    if rmax > rho:
        raise ChartError(f"pulled-back support reaches |z| = {rmax:.3f}, beyond the cap {rho:.3f}")
    return rho


def pullback_vekua(h: Callable, chart: ConformalChart, grid: PolarGrid,
                   support_radius: Optional[float] = None) -> Field:
    """``h~(z) = h(C(z)) conj(C'(z))`` at the grid nodes.

    ``h`` is a callable on domain points that vanishes outside its support.
    """
    z = grid.nodes
    vals = np.asarray(h(chart(z)), dtype=complex) * np.conj(chart.derivative(z))
    rho = _support_radius(grid, vals, support_radius)
    vals = np.where(grid.inside(rho), vals, 0)
    return Field(grid, vals, rho)


def pullback_poisson(H: Callable, chart: ConformalChart, grid: PolarGrid,
                     support_radius: Optional[float] = None) -> Field:
    """``H~(z) = |C'(z)|^2 H(C(z))`` at the grid nodes."""
    z = grid.nodes
    vals = np.real(np.asarray(H(chart(z)))) * np.abs(chart.derivative(z)) ** 2
    rho = _support_radius(grid, vals, support_radius)
    vals = np.where(grid.inside(rho), vals, 0.0)
    return Field(grid, vals, rho)


def _domain_samples(func: Callable, chart: ConformalChart, thetas, param: str):
    if param == "arclength":
        return np.asarray(func(chart.arclength_parameter(thetas)))
    if param == "point":
        return np.asarray(func(chart.boundary_points(thetas)))
    raise ChartError(f"unknown boundary parameterization {param!r}")


def pullback_boundary(func: Callable, chart: ConformalChart, n_theta: int, role: str = "phi",
                      param: str = "arclength", thetas=None):
    """Resample domain boundary data at ``c_*^{-1}`` of the disk nodes.

    Parameters
    ----------
    func : callable
        Boundary data on the domain, a function of the normalized arc
        length (``param="arclength"``) or of the boundary point
        (``param="point"``).
    role : {"phi", "lambda", "nu", "phi_poincare"}
        ``phi`` and ``lambda`` are composed only; ``nu`` is rotated by
        ``conj(C') / |C'|`` and ``phi_poincare`` scaled by ``|C'|``.
    thetas : array_like, optional
        Sample at these disk angles instead of the ``n_theta`` nodes; the
        raw values are returned rather than a signal.
    """
    th = TWO_PI * np.arange(n_theta) / n_theta if thetas is None else np.asarray(thetas, dtype=float)
    vals = _domain_samples(func, chart, th, param)
    dC = chart.derivative((1.0 - BOUNDARY_EPS) * np.exp(1j * th))
    if role == "phi":
        out = np.real(vals)
    elif role == "lambda":
        v = np.asarray(vals, dtype=complex)
        out = v / np.abs(v)
    elif role == "nu":
        v = np.asarray(vals, dtype=complex) * np.conj(dC) / np.abs(dC)
        out = v / np.abs(v)
    elif role == "phi_poincare":
        out = np.real(vals) * np.abs(dC)
    else:
        raise ChartError(f"unknown boundary role {role!r}")
    if thetas is not None:
        return out
    return UnimodularSignal(out) if role in ("lambda", "nu") else BoundarySignal(out)


def domain_inner_normal(chart: ConformalChart) -> Callable:
    """Inner unit normal of the domain boundary as a function of the boundary point."""

    def nu(points):
        z = chart.inverse(points)
        z = z / np.abs(z)
        d = chart.derivative(z)
        return -z * d / np.abs(d)

    return nu


def pushforward_solution(field: Field, chart: ConformalChart, points) -> np.ndarray:
    """``f(xi) = f~(c(xi))`` at domain points (spectral-Lagrange interpolation)."""
    w = np.atleast_1d(np.asarray(points, dtype=complex))
    z = chart.inverse(w)
    if np.any(np.abs(z) > field.grid.radii[-2]):
        raise GridError("domain point maps outside the grid")
    return interpolate_spectral(field, z)
