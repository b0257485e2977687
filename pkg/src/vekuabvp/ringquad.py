"""Area integrals evaluated at the grid nodes by ring-wise Fourier modes.

On a ring ``|w| = s`` the angular integrals of the Cauchy and logarithmic
kernels are available in closed form for every Fourier mode of the
source, which leaves one-dimensional radial integrals per mode.  Those
are split at the target radius (so the integrands are smooth on each
piece) and computed by Gauss-Legendre rules applied to a cubic
interpolant of the mode coefficients, with ghost rings across the
origin supplying the parity.  Cumulative radial sums use the stable
recurrences ``(r_i / r_{i+1})**p`` so high modes never overflow.
"""
from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss

from .diskgrid import PolarGrid

GL_ORDER = 8
_STENCIL = 4

_CACHE: dict = {}


def _lagrange(nodes: np.ndarray, x: np.ndarray) -> np.ndarray:
    w = np.ones((x.size, nodes.size))
    for j in range(nodes.size):
        for m in range(nodes.size):
            if m != j:
                w[:, j] *= (x - nodes[m]) / (nodes[j] - nodes[m])
    return w


class RingQuadrature:
    """Radial product-integration data for the source layers of a grid."""

    def __init__(self, grid: PolarGrid, order: int = GL_ORDER):
        M = grid.n_inner
        if M < 2:
            raise ValueError("ring quadrature needs at least two source layers")
        self.grid = grid
        self.M = M
        self.n = grid.n_theta
        s = grid.radii[:M]
        self.rho = float(grid.edges[M])
        # breakpoints 0, s_0, ..., s_{M-1}, rho; targets sit on breakpoints
        self.bps = np.concatenate([[0.0], s, [self.rho]])
        ext = np.concatenate([-s[1::-1], s])
        x, w = leggauss(order)
        nint = self.bps.size - 1
        self.gl_x = np.empty((nint, order))
        self.gl_w = np.empty((nint, order))
        self.interp = np.zeros((nint, order, M + 2))
        for i in range(nint):
            a, b = self.bps[i], self.bps[i + 1]
            xx = 0.5 * (b - a) * x + 0.5 * (a + b)
            self.gl_x[i] = xx
            self.gl_w[i] = 0.5 * (b - a) * w
            lo = min(i, M + 2 - _STENCIL)
            st = np.arange(lo, lo + _STENCIL)
            self.interp[i][:, st] = _lagrange(ext[st], xx)
        self.m = np.fft.fftfreq(self.n, 1.0 / self.n).astype(int)
        self.parity = np.where(self.m % 2 == 0, 1.0, -1.0)

    @classmethod
    def for_grid(cls, grid: PolarGrid) -> "RingQuadrature":
        key = (grid.n_r, grid.n_theta, grid.support_radius, grid.edges.tobytes())
        rq = _CACHE.get(key)
        if rq is None:
            if len(_CACHE) > 16:
                _CACHE.clear()
            rq = _CACHE[key] = cls(grid)
        return rq

    def modes_at_gl(self, values: np.ndarray) -> np.ndarray:
        """Fourier modes of the inner-layer samples at every GL point, ``(nint, q, n)``."""
        c = np.fft.fft(np.asarray(values[: self.M], dtype=complex), axis=1) / self.n
        ghosts = c[1::-1] * self.parity
        ext = np.vstack([ghosts, c])
        return np.einsum("iqe,en->iqn", self.interp, ext)

    def cumulative(self, F: np.ndarray, p: np.ndarray):
        """Radial sums for per-mode powers ``p``.

        Returns ``up[i] = int_0^{b_{i+1}} F(s) (s / b_{i+1})**p ds`` for every
        breakpoint after 0, and ``down[i] = int_{b_i}^{rho} F(s) (b_i / s)**p ds``.
        """
        bps, x, w = self.bps, self.gl_x, self.gl_w
        nint = x.shape[0]
        p = p[None, :]
        up_piece = np.empty((nint, F.shape[2]), dtype=complex)
        dn_piece = np.zeros_like(up_piece)
        for i in range(nint):
            a, b = bps[i], bps[i + 1]
            up_piece[i] = np.sum(w[i][:, None] * F[i] * (x[i][:, None] / b) ** p, axis=0)
            if a > 0:
                dn_piece[i] = np.sum(w[i][:, None] * F[i] * (a / x[i][:, None]) ** p, axis=0)
        up = np.empty_like(up_piece)
        up[0] = up_piece[0]
        for i in range(1, nint):
            up[i] = (bps[i] / bps[i + 1]) ** p[0] * up[i - 1] + up_piece[i]
        down = np.zeros((nint + 1, F.shape[2]), dtype=complex)
        for i in range(nint - 1, 0, -1):
            down[i] = (bps[i] / bps[i + 1]) ** p[0] * down[i + 1] + dn_piece[i]
        return up, down

    # ------------------------------------------------------------ operators

    def pompeiu_modes(self, values: np.ndarray):
        """Mode tables of ``T_g`` on all layers, indexed by source mode ``m``.

        The transform itself is ``exp(-i theta) * sum_m T[:, m] exp(i m theta)``.
        Also returns ``laurent[p-1] = c_p`` with ``T_g(z) = sum c_p z**-p``
        for ``|z| >= rho``.
        """
        M, m = self.M, self.m
        F = self.modes_at_gl(values)
        p = np.where(m <= 0, 1 - m, m - 1)
        up, down = self.cumulative(F, p)
        radii = self.grid.radii
        out = np.zeros((self.grid.n_r, self.n), dtype=complex)
        neg = (m <= 0)[None, :]
        out[:M] = np.where(neg, 2.0 * up[:M], -2.0 * down[1:M + 1])
        ro = radii[M:, None]
        out[M:] = np.where(neg, 2.0 * (self.rho / ro) ** p[None, :] * up[-1][None, :], 0.0)
        # Laurent coefficients from the negative source modes
        pos = np.flatnonzero(m <= 0)
        order = np.argsort(p[pos])
        laurent = np.zeros(p[pos].max(), dtype=complex)
        laurent[p[pos][order] - 1] = 2.0 * up[-1][pos][order] * self.rho ** p[pos][order]
        return out, laurent

    def pompeiu(self, values: np.ndarray) -> np.ndarray:
        modes, _ = self.pompeiu_modes(values)
        phase = np.exp(-1j * self.grid.thetas)[None, :]
        return phase * np.fft.ifft(modes, axis=1) * self.n

    def newtonian(self, values: np.ndarray) -> np.ndarray:
        M, m = self.M, self.m
        F = self.modes_at_gl(values) * self.gl_x[:, :, None]
        p = np.abs(m)
        up, down = self.cumulative(F, p)
        r = self.grid.radii
        pp = np.where(p == 0, 1, p)[None, :]
        f0 = F[:, :, 0]
        cum = np.cumsum(np.sum(self.gl_w * f0, axis=1))
        lg = np.sum(self.gl_w * f0 * np.log(self.gl_x), axis=1)
        tail = np.concatenate([np.cumsum(lg[::-1])[::-1], [0.0]])
        out = np.zeros((self.grid.n_r, self.n), dtype=complex)
        inner = -(up[:M] + down[1:M + 1]) / (2.0 * pp)
        inner[:, 0] = cum[:M] * np.log(r[:M]) + tail[1:M + 1]
        out[:M] = inner
        ro = r[M:]
        outer = -((self.rho / ro[:, None]) ** p[None, :] * up[-1][None, :]) / (2.0 * pp)
        outer[:, 0] = cum[-1] * np.log(ro)
        out[M:] = outer
        return (np.fft.ifft(out, axis=1) * self.n).real
