"""Nontangential cone probes and angular-limit estimates."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..diskgrid import Field, GridError, interpolate_spectral

DEFAULT_DISTANCES = tuple(float(d) for d in np.geomspace(1e-1, 1e-4, 7))


@dataclass(frozen=True)
class ConeProbe:
    """Rays into the disk from ``e^{i theta0}`` inside a cone around the inner normal.

    Parameters
    ----------
    theta0 : float
        Boundary angle.
    aperture_deg : float
        Half-angle of the cone in degrees, below 90 (nontangential).
    n_rays : int
        Number of rays, spread evenly over ``[-aperture, aperture]``.
    distances : sequence of float
        Strictly decreasing distances from the boundary point.
    """

    theta0: float
    aperture_deg: float = 30.0
    n_rays: int = 8
    distances: tuple = field(default=DEFAULT_DISTANCES)

    def __post_init__(self):
        d = tuple(float(x) for x in self.distances)
        object.__setattr__(self, "distances", d)
        if not 0.0 <= self.aperture_deg < 90.0:
            raise GridError("cone aperture must lie in [0, 90) degrees")
        if int(self.n_rays) < 1:
            raise GridError("cone needs at least one ray")
        if not d or any(x <= 0 or x >= 1 for x in d):
            raise GridError("probe distances must lie in (0, 1)")
        if any(b >= a for a, b in zip(d, d[1:])):
            raise GridError("probe distances must be strictly decreasing")

    @property
    def directions(self) -> np.ndarray:
        """Ray angles measured from the inner normal (radians)."""
        if self.n_rays == 1:
            return np.zeros(1)
        return np.deg2rad(np.linspace(-self.aperture_deg, self.aperture_deg, self.n_rays))

    @property
    def points(self) -> np.ndarray:
        """Probe points, shape ``(len(distances), n_rays)``."""
        zeta = np.exp(1j * self.theta0)
        d = np.asarray(self.distances)[:, None]
        return zeta * (1.0 - d * np.exp(1j * self.directions)[None, :])


def angular_limit_estimate(values, probe: Optional[ConeProbe] = None):
    """Estimate the limit of a field along a cone.

    Parameters
    ----------
    values : array_like, shape ``(n_distances, n_rays)``
        Field values at ``probe.points`` (innermost distance last).
    probe : ConeProbe, optional
        Only used to check the shape.

    Returns
    -------
    estimate : float or complex
        Mean over the rays at the innermost distance.
    spread : float
        Largest pairwise deviation among the values on the last two
        distances (all rays).
    """
    v = np.asarray(values)
    if v.ndim == 1:
        v = v[:, None]
    if probe is not None and v.shape != (len(probe.distances), probe.n_rays):
        raise GridError(f"values of shape {v.shape} do not match the probe")
    est = v[-1].mean()
    tail = v[-2:].ravel()
    if np.iscomplexobj(tail):
        spread = float(np.max(np.abs(tail[:, None] - tail[None, :])))
    else:
        spread = float(tail.max() - tail.min())
    if not np.iscomplexobj(v):
        est = float(est)
    return est, spread


def probe_field(f: Field, probe: ConeProbe) -> np.ndarray:
    """Interpolate a grid field at the probe points.

    Raises
    ------
    GridError
        If a probe point lies beyond the interpolation range of the grid
        ("probe exits grid").
    """
    pts = probe.points
    if np.any(np.abs(pts) > f.grid.radii[-2]):
        raise GridError("probe exits grid")
    return interpolate_spectral(f, pts.ravel()).reshape(pts.shape)


def probe_angles(n: int) -> np.ndarray:
    """``n`` equally spaced probe angles offset by half a step from 0."""
    return 2.0 * np.pi * (np.arange(n) + 0.5) / n


def probe_set(thetas: Sequence[float], aperture_deg: float = 30.0, n_rays: int = 8,
              distances=DEFAULT_DISTANCES) -> list:
    return [ConeProbe(float(t), aperture_deg, n_rays, tuple(distances)) for t in thetas]


def stack_points(probes: Sequence[ConeProbe]) -> np.ndarray:
    """All probe points as one flat array (probe-major)."""
    return np.concatenate([p.points.ravel() for p in probes]) if probes else np.zeros(0, complex)


def split_values(values, probes: Sequence[ConeProbe]) -> list:
    """Inverse of :func:`stack_points` for a flat array of values."""
    out, k = [], 0
    for p in probes:
        m = len(p.distances) * p.n_rays
        out.append(np.asarray(values[k:k + m]).reshape(len(p.distances), p.n_rays))
        k += m
    return out


def near_angles(thetas, marks, margin: float) -> np.ndarray:
    """True where ``thetas`` are within ``margin`` (periodically) of any of ``marks``."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    if len(marks) == 0:
        return np.zeros(thetas.shape, dtype=bool)
    d = np.angle(np.exp(1j * (thetas[:, None] - np.asarray(marks, dtype=float)[None, :])))
    return np.any(np.abs(d) <= margin, axis=1)
