"""Finite-difference residuals of the semilinear equations."""
from __future__ import annotations

import numpy as np

from ..diskgrid import Field, GridError, PolarGrid, dbar_fd, laplacian_fd

DEFAULT_RESIDUAL_RADIUS = 0.8
_EPS = 1e-30


def _values(grid: PolarGrid, f) -> np.ndarray:
    v = f.values if isinstance(f, Field) else np.asarray(f)
    if v.shape != grid.shape:
        raise GridError(f"field of shape {v.shape} is not on the grid {grid.shape}")
    return v


def weighted_l2(grid: PolarGrid, v: np.ndarray, mask: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.abs(v[mask]) ** 2 * grid.cell_weights[mask])))


def pde_residual(mode: str, solution, coefficient: Field, nonlinearity=None,
                 radius: float = DEFAULT_RESIDUAL_RADIUS) -> float:
    """Relative L^2 residual of ``D u = c * nl(u)`` on interior nodes.

    Parameters
    ----------
    mode : {"vekua", "poisson"}
        ``D`` is the finite-difference ``d/dzbar`` or Laplacian.
    solution : Field or ndarray
        ``f`` (vekua) or ``U`` (poisson; the real part is used).
    coefficient : Field
        ``h`` or ``H`` on the same grid.
    nonlinearity : callable, optional
        ``q`` or ``Q``; ``None`` means the linear case ``nl = 1``.
    radius : float
        Only nodes with ``|z| <= radius`` and a complete stencil count.

    Returns
    -------
    float
        ``||D u - c nl(u)|| / (||c nl(u)|| + eps)`` in the area-weighted
        discrete L^2 norm.  When the right-hand side vanishes identically
        (a homogeneous problem) the solution norm takes its place, so the
        value measures ``||D u||`` relative to the size of ``u``.
    """
    grid = coefficient.grid
    if grid.n_r < 8 or grid.n_theta < 8:
        raise GridError("grid too coarse for the residual stencil")
    u = _values(grid, solution)
    if mode == "vekua":
        D = dbar_fd(grid, u.astype(complex))
        arg = u
    elif mode == "poisson":
        arg = np.real(u)
        D = laplacian_fd(grid, arg)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    c = coefficient.values
    rhs = c * (np.ones_like(arg) if nonlinearity is None else nonlinearity(arg))
    mask = grid.inside(radius) & np.isfinite(D)
    if not mask.any():
        raise GridError("grid too coarse for the residual stencil")
    num = weighted_l2(grid, D - rhs, mask)
    den = weighted_l2(grid, rhs, mask)
    if den == 0.0:
        den = weighted_l2(grid, u, mask)
    return num / (den + _EPS)
