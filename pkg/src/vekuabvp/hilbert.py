"""The Hilbert operator ``H*_g = T_g + A (S_Phi - S_{Phi_g})`` on the unit disk.

``A = exp(i a)`` where ``a`` is the Schwarz-type integral of the principal
argument ``alpha`` of ``lambda``; ``beta`` is the boundary value of
``Im a``.  Wraps of the principal argument (a winding ``lambda``) and jumps of
``lambda`` itself are split off as a sawtooth plus steps whose
contributions to ``A`` are closed-form power factors, so ``A`` stays exact
where the trigonometric series of a discontinuous ``alpha`` would ring.

``HilbertOperator`` freezes everything that does not depend on the
source ``g`` (``A``, ``S_Phi``, the unit singular integrals) at a fixed set
of evaluation points so repeated applications inside a fixed-point loop
only redo the source-dependent parts.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .boundarydata import (
    DEFAULT_CANTOR_DEPTH,
    TWO_PI,
    AntiderivativePath,
    CantorLadder,
    LadderPair,
    SingularMeasure,
    antiderivative,
    arg_principal,
    close_path,
    harmonic_conjugate,
    parse_closure,
)
from .diskgrid import BoundarySignal, Field, PolarGrid, UnimodularSignal
from .transforms import (
    TransformError,
    _horner,
    boundary_theta_derivative,
    eval_schwartz_parts,
    measure_schwartz,
    point_mass_kernel,
    pompeiu_on_grid,
    pompeiu_transform,
    positive_modes,
    schwartz_parts,
)


class HilbertError(ValueError):
    pass


# ------------------------------------------------------------- orientation

def literal_a(alpha: BoundarySignal, points) -> np.ndarray:
    """``(1/(2 pi i)) oint alpha (z + zeta)/(z - zeta) d zeta / zeta`` by the trapezoid rule.

    This is the kernel exactly as written for ``a(z)``; it is kept as a
    reference for :data:`ORIENTATION` and for tests.
    """
    v = np.asarray(alpha.values, dtype=float)
    n = v.size
    zeta = np.exp(1j * TWO_PI * np.arange(n) / n)[None, :]
    z = np.atleast_1d(np.asarray(points, dtype=complex))[:, None]
    # d zeta / zeta = i d theta
    ker = (z + zeta) / (z - zeta)
    return (ker * 1j * v[None, :]).sum(axis=1) * (TWO_PI / n) / (2j * np.pi)


def _calibrate_orientation() -> float:
    """Sign making ``Re a`` tend to ``alpha``: the literal kernel applied to ``alpha = 1`` at 0."""
    val = literal_a(BoundarySignal(np.ones(16)), [0.0])[0]
    return float(np.sign(val.real))


# The literal kernel reproduces ORIENTATION * alpha for constant data, so
# the calibrated a(z) is ORIENTATION times the literal integral.
ORIENTATION = _calibrate_orientation()


# ------------------------------------------------------- arg decomposition

class ArcMeasure(SingularMeasure):
    """Lebesgue measure restricted to ``[left, 2 pi)`` (an arc indicator)."""

    def __init__(self, left: float):
        self.left = float(left)

    def __eq__(self, other):
        return type(other) is type(self) and other.left == self.left

    def __hash__(self):
        return hash(("ArcMeasure", self.left))

    def __call__(self, theta):
        t = np.asarray(theta, dtype=float)
        return np.clip(t - self.left, 0.0, None)

    def intervals(self):
        ell = TWO_PI - self.left
        return np.array([self.left]), np.array([ell]), np.array([ell])


@dataclass(frozen=True)
class ArgDecomposition:
    """``alpha = smooth + winding * theta - 2 pi (k0 + sum dk [theta >= t])`` on ``[0, 2 pi)``.

    ``winding`` and the step sizes ``dk`` are integers for a continuous
    ``lambda``; jumps of ``lambda`` itself make them real.
    """

    smooth: np.ndarray
    winding: float
    k0: int
    steps: tuple

    @property
    def n_theta(self) -> int:
        return self.smooth.size

    def alpha(self, theta) -> np.ndarray:
        """Reassemble the principal argument at arbitrary angles (for checks)."""
        t = np.mod(np.asarray(theta, dtype=float), TWO_PI)
        n = self.n_theta
        c = np.fft.fft(self.smooth) / n
        k = np.fft.fftfreq(n, 1.0 / n)
        sm = np.real(np.exp(1j * np.multiply.outer(t, k)) @ c)
        k_of_t = self.k0 + sum(dk * (t >= s) for s, dk in self.steps)
        return sm + self.winding * t - TWO_PI * k_of_t


JUMP_FLOOR = 0.05
JUMP_FACTOR = 20.0


def phase_jumps(alpha: BoundarySignal) -> np.ndarray:
    """Jumps of ``lambda = exp(i alpha)`` between neighbouring samples (cyclic).

    Entry ``j`` is the jump between samples ``j`` and ``j + 1`` (the last
    one across ``2 pi``).  A jump is an increment whose deviation from the
    mean of its neighbours exceeds ``JUMP_FLOOR`` and ``JUMP_FACTOR`` times
    the median deviation; the neighbour mean is subtracted so the smooth
    trend stays in the smooth part.
    """
    a = np.asarray(alpha.values, dtype=float)
    d = np.angle(np.exp(1j * (np.roll(a, -1) - a)))
    dev = d - 0.5 * (np.roll(d, 1) + np.roll(d, -1))
    thresh = max(JUMP_FLOOR, JUMP_FACTOR * float(np.median(np.abs(dev))))
    big = np.abs(dev) > thresh
    # a single jump also disturbs the deviation of both neighbours
    keep = big & (np.abs(dev) >= np.abs(np.roll(dev, 1))) & (np.abs(dev) >= np.abs(np.roll(dev, -1)))
    out = np.zeros(a.size)
    for j in np.flatnonzero(keep):
        nb = [i % a.size for i in (j - 1, j + 1) if not keep[i % a.size]]
        trend = float(np.mean(d[nb])) if nb else 0.0
        out[j] = d[j] - trend
    return out


def decompose_arg(alpha: BoundarySignal) -> ArgDecomposition:
    """Split principal-argument samples into a periodic part, a winding and steps.

    Jumps of ``lambda`` (see :func:`phase_jumps`) become real steps placed
    mid-cell, the one across ``2 pi`` at ``2 pi - h / 2``; the winding is
    whatever makes the remaining part periodic (real in general).  What
    remains is unwrapped; a jump of more than ``pi`` between neighbouring
    samples of it is a branch wrap, located at the linear-interpolation
    crossing with the branch line.
    """
    a = np.asarray(alpha.values, dtype=float)
    n = a.size
    h = TWO_PI / n
    thetas = h * np.arange(n)
    J = phase_jumps(alpha)
    d = np.angle(np.exp(1j * (np.roll(a, -1) - a)))
    inc = d - J
    cont = a[0] + np.concatenate([[0.0], np.cumsum(inc[:-1])])
    winding = float(np.sum(inc)) / TWO_PI
    w_int = int(round(winding))
    if abs(winding - w_int) < 1e-9:
        winding = w_int
    jcum = np.concatenate([[0.0], np.cumsum(J[:-1])])
    au = cont + jcum
    k = np.rint((au - a) / TWO_PI).astype(int)
    smooth = cont - winding * thetas
    steps = [(thetas[j] + 0.5 * h, -J[j] / TWO_PI) for j in np.flatnonzero(J)]
    for j in np.flatnonzero(np.diff(k)):
        dk = int(k[j + 1] - k[j])
        if abs(dk) == 1:
            branch = np.pi * (2 * k[j] + (1 if dk > 0 else -1))
            frac = (branch - au[j]) / (au[j + 1] - au[j])
            t = thetas[j] + h * float(np.clip(frac, 0.0, 1.0))
        else:
            t = thetas[j] + 0.5 * h
        steps.append((t, dk))
    steps.sort(key=lambda st: st[0])
    return ArgDecomposition(smooth, winding, int(k[0]), tuple(steps))


def _schwarz_series(samples: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Schwarz integral of a real periodic signal (``Re`` tends to the signal)."""
    return float(np.mean(samples)) + 2.0 * _horner(positive_modes(samples), z)


def a_function(dec: ArgDecomposition, points) -> np.ndarray:
    """Calibrated ``a(z)``: analytic, ``Re a -> alpha``, ``Im a(0) = 0``."""
    z = np.atleast_1d(np.asarray(points, dtype=complex))
    out = _schwarz_series(dec.smooth, z)
    if dec.winding:
        out = out + dec.winding * (np.pi - 2j * np.log(1.0 - z))
    out = out - TWO_PI * dec.k0
    for t, dk in dec.steps:
        out = out - TWO_PI * dk * measure_schwartz(ArcMeasure(t), z)
    return out


def multiplier(dec: ArgDecomposition, points) -> np.ndarray:
    """``A(z) = exp(i a(z))`` with the winding and step factors in closed form."""
    z = np.atleast_1d(np.asarray(points, dtype=complex))
    out = np.exp(1j * _schwarz_series(dec.smooth, z))
    log1 = np.log(1.0 - z)
    if dec.winding:
        if float(dec.winding).is_integer():
            out = out * (-1.0) ** int(dec.winding) * (1.0 - z) ** (2 * int(dec.winding))
        else:
            out = out * np.exp(1j * np.pi * dec.winding + 2.0 * dec.winding * log1)
    for t, dk in dec.steps:
        ell = TWO_PI - t
        if float(dk).is_integer():
            out = out * np.exp(1j * dk * ell) * ((np.exp(1j * t) - z) / (1.0 - z)) ** (2 * int(dk))
        else:
            # principal logs are analytic in the disk since Re(1 - w z) > 0 for |w| = 1
            out = out * np.exp(-1j * dk * ell + 2.0 * dk * (np.log(1.0 - z * np.exp(-1j * t)) - log1))
    return out


def boundary_exp_beta(dec: ArgDecomposition) -> np.ndarray:
    """``exp(beta)`` at the nodes, i.e. ``1 / |A|`` on the circle."""
    n = dec.n_theta
    th = TWO_PI * np.arange(n) / n
    zeta = np.exp(1j * th)
    beta_s = harmonic_conjugate(BoundarySignal(dec.smooth)).values
    out = np.exp(beta_s)
    d1 = np.abs(1.0 - zeta)
    expo = -2 * dec.winding + 2 * sum(dk for _, dk in dec.steps)
    with np.errstate(divide="ignore"):
        if abs(expo) > 1e-14:
            out = out * d1 ** float(expo)
        for t, dk in dec.steps:
            out = out * np.abs(np.exp(1j * t) - zeta) ** (-2.0 * dk)
    return out


def weight_exponents(dec: ArgDecomposition) -> list:
    """Exponents ``e`` of the algebraic singularities ``|zeta - e^{it}|^e`` of ``exp(beta)``.

    Returns ``(t, e)`` pairs, ``t = 0`` carrying the winding.  ``exp(beta)``
    is integrable on the circle exactly when every exponent exceeds ``-1``.
    """
    total = {0.0: -2.0 * dec.winding + 2.0 * sum(dk for _, dk in dec.steps)}
    for t, dk in dec.steps:
        key = float(t) % TWO_PI
        total[key] = total.get(key, 0.0) - 2.0 * dk
    return [(t, e) for t, e in sorted(total.items()) if abs(e) > 1e-14]


def build_A(lam: UnimodularSignal, points) -> np.ndarray:
    """``A(z) = exp(i a(z))`` for the principal argument of ``lambda``."""
    z = np.atleast_1d(np.asarray(points, dtype=complex))
    if np.any(np.abs(z) >= 1.0):
        raise HilbertError("build_A needs points inside the unit disk")
    return multiplier(decompose_arg(arg_principal(lam)), z)


# ----------------------------------------------------------------- problem

@dataclass(frozen=True)
class SingularConfig:
    """Opt-in singular parts.

    When ``enabled``: ``S(theta) = C(theta) * oint Lambda {T_g}_theta`` is added
    inside ``Phi_g`` and ``amplitude`` times a :class:`LadderPair` of the same
    depth is added to ``Phi``.  The pair vanishes at both ends, so the
    endpoints and the a.e. derivative of ``Phi`` are unchanged.
    """

    depth: int = DEFAULT_CANTOR_DEPTH
    enabled: bool = False
    amplitude: float = 1.0


@dataclass(frozen=True)
class HilbertProblem:
    """Data of the Hilbert problem ``Re{conj(lambda) f} -> phi`` with derived boundary terms."""

    lam: UnimodularSignal
    phi: BoundarySignal
    closure: Optional[object] = "cantor"
    singular: SingularConfig = field(default_factory=SingularConfig)
    decomposition: ArgDecomposition = field(init=False, repr=False)
    exp_beta: np.ndarray = field(init=False, repr=False)
    Phi: AntiderivativePath = field(init=False, repr=False)
    Lambda: AntiderivativePath = field(init=False, repr=False)

    def __post_init__(self):
        n = self.lam.n_theta
        self.phi.check_size(n)
        if not self.phi.is_real:
            raise HilbertError("phi must be a real signal")
        parse_closure(self.closure)
        dec = decompose_arg(arg_principal(self.lam))
        bad = [(t, e) for t, e in weight_exponents(dec) if e <= -1.0]
        if bad:
            t, e = bad[0]
            raise HilbertError(f"exp(beta) is not integrable: it behaves like |zeta - e^(it)|^{e:.3g} "
                               f"at t = {t:.4f}; the antiderivatives of phi exp(beta) and "
                               f"conj(lambda) exp(beta) do not exist for this lambda")
        eb = boundary_exp_beta(dec)
        if not np.all(np.isfinite(eb)):
            raise HilbertError("exp(beta) is infinite at a sample: lambda's argument wraps onto a node")
        weight = BoundarySignal(eb)
        Phi = antiderivative(self.phi, weight, closure=self.closure)
        if self.singular.enabled and self.singular.amplitude:
            Phi = Phi.with_singular(self.singular.amplitude, LadderPair(self.singular.depth))
        Lam = antiderivative(BoundarySignal(np.conj(self.lam.values)), weight)
        object.__setattr__(self, "decomposition", dec)
        object.__setattr__(self, "exp_beta", eb)
        object.__setattr__(self, "Phi", Phi)
        object.__setattr__(self, "Lambda", Lam)

    @property
    def n_theta(self) -> int:
        return self.lam.n_theta

    @property
    def thetas(self) -> np.ndarray:
        return self.lam.thetas

    @property
    def alpha(self) -> BoundarySignal:
        return arg_principal(self.lam)

    @property
    def beta(self) -> BoundarySignal:
        return BoundarySignal(np.log(self.exp_beta))


def build_phi_g(lam: UnimodularSignal, g: Field) -> BoundarySignal:
    """``phi_g = Re{conj(lambda) T_g}`` on the circle."""
    _check_support(g)
    zeta = np.exp(1j * lam.thetas)
    return BoundarySignal(np.real(np.conj(lam.values) * pompeiu_transform(g, zeta)))


def _check_support(g: Field):
    if g.support_radius is None:
        raise HilbertError("source needs a support radius")
    if g.support_radius >= 1.0 - 1e-6:
        raise HilbertError("support touches the boundary")


def s_integral(problem: HilbertProblem, boundary_T: np.ndarray) -> complex:
    """``oint Lambda {T_g}_theta d theta`` integrated by parts (``Lambda(0) = 0``)."""
    lam_end = problem.Lambda.base[-1]
    integrand = np.conj(problem.lam.values) * problem.exp_beta * boundary_T
    return complex(lam_end * boundary_T[0] - TWO_PI * np.mean(integrand))


def build_Phi_g(problem: HilbertProblem, g: Field, boundary_T: Optional[np.ndarray] = None) -> AntiderivativePath:
    """Antiderivative of ``phi_g e^beta`` with optional ``S(theta)`` and the problem's closure."""
    _check_support(g)
    if boundary_T is None:
        boundary_T = pompeiu_transform(g, np.exp(1j * problem.thetas))
    phi_g = np.real(np.conj(problem.lam.values) * boundary_T)
    path = antiderivative(BoundarySignal(phi_g), BoundarySignal(problem.exp_beta))
    if problem.singular.enabled:
        s_val = s_integral(problem, boundary_T).real
        if s_val != 0.0:
            path = path.with_singular(s_val, CantorLadder(problem.singular.depth))
    depth = parse_closure(problem.closure)
    if depth is not None:
        path = close_path(path, depth)
    return path


def Phi_g_literal(problem: HilbertProblem, g: Field) -> np.ndarray:
    """``Re{Lambda T_g - int_0^theta Lambda {T_g}_theta + S}`` at the ``n + 1`` nodes.

    Cumulative trapezoid rule; used as an independent check of
    :func:`build_Phi_g` (no closure applied).
    """
    n = problem.n_theta
    nodes = TWO_PI * np.arange(n + 1) / n
    zeta = np.exp(1j * nodes)
    T = pompeiu_transform(g, zeta)
    Tt = boundary_theta_derivative(g, nodes)
    Lam = problem.Lambda.values()
    prod = Lam * Tt
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (prod[1:] + prod[:-1]))]) * (TWO_PI / n)
    out = Lam * T - cum
    if problem.singular.enabled:
        out = out + CantorLadder(problem.singular.depth)(nodes) * cum[-1]
    return np.real(out)


# ---------------------------------------------------------------- operator

class HilbertOperator:
    """``g -> H*_g`` at the grid nodes and at optional extra points.

    Parameters
    ----------
    problem : HilbertProblem
    grid : PolarGrid
        Sources live on its inner layers; fields are returned on all nodes.
    points : array_like, optional
        Extra evaluation points (e.g. boundary probes) with ``|z| < 1``.
    """

    def __init__(self, problem: HilbertProblem, grid: PolarGrid, points=None):
        if grid.n_theta != problem.n_theta:
            raise HilbertError("grid and boundary data have different n_theta")
        self.problem = problem
        self.grid = grid
        self.zeta = np.exp(1j * problem.thetas)
        self.sets = {}
        self._prepare("grid", grid.nodes.ravel())
        if points is not None:
            self._prepare("points", np.atleast_1d(np.asarray(points, dtype=complex)))
        depth = problem.singular.depth
        d_close = parse_closure(problem.closure)
        self.g_measures = tuple({CantorLadder(d) for d in (depth, d_close) if d is not None})

    def _prepare(self, name: str, z: np.ndarray):
        if np.any(np.abs(z) >= 1.0):
            raise HilbertError("evaluation points must lie inside the unit disk")
        p = self.problem
        A = multiplier(p.decomposition, z)
        S_Phi = eval_schwartz_parts(schwartz_parts(p.Phi), z)
        self.sets[name] = {"z": z, "A": A, "S_Phi": S_Phi, "unit": {}, "pm": point_mass_kernel(z)}

    def _unit(self, name: str, mu) -> np.ndarray:
        cache = self.sets[name]["unit"]
        if mu not in cache:
            cache[mu] = measure_schwartz(mu, self.sets[name]["z"])
        return cache[mu]

    def boundary_trace(self, g: Field) -> np.ndarray:
        """``T_g`` at the boundary nodes (direct quadrature)."""
        return pompeiu_transform(g, self.zeta)

    def Phi_g(self, g: Field, boundary_T=None) -> AntiderivativePath:
        return build_Phi_g(self.problem, g, boundary_T)

    def correction(self, Phi_g: AntiderivativePath, name: str = "grid") -> np.ndarray:
        """``A (S_Phi - S_{Phi_g})`` on a prepared point set."""
        st = self.sets[name]
        parts = schwartz_parts(Phi_g)
        unit = {mu: self._unit(name, mu) for _, mu in parts.singular}
        S_g = eval_schwartz_parts(parts, st["z"], unit)
        return st["A"] * (st["S_Phi"] - S_g)

    def apply(self, g: Field):
        """Return ``(H*_g on the grid, Phi_g)``."""
        Phi_g = self.Phi_g(g)
        T = pompeiu_on_grid(g)
        C = self.correction(Phi_g).reshape(self.grid.shape)
        return T + C, Phi_g

    def at_points(self, g: Field, Phi_g: Optional[AntiderivativePath] = None) -> np.ndarray:
        """``H*_g`` at the extra points given at construction."""
        if "points" not in self.sets:
            raise HilbertError("no extra points were prepared")
        if Phi_g is None:
            Phi_g = self.Phi_g(g)
        z = self.sets["points"]["z"]
        return pompeiu_transform(g, z) + self.correction(Phi_g, "points")


def assemble_hilbert(problem: HilbertProblem, g: Field, points) -> np.ndarray:
    """``f = T_g + A (S_Phi - S_{Phi_g})`` at arbitrary points inside the disk."""
    z = np.atleast_1d(np.asarray(points, dtype=complex))
    if np.any(np.abs(z) >= 1.0):
        raise HilbertError("evaluation points must lie inside the unit disk")
    _check_support(g)
    Phi_g = build_Phi_g(problem, g)
    A = multiplier(problem.decomposition, z)
    S_Phi = eval_schwartz_parts(schwartz_parts(problem.Phi), z)
    S_g = eval_schwartz_parts(schwartz_parts(Phi_g), z)
    return pompeiu_transform(g, z) + A * (S_Phi - S_g)


def hilbert_on_grid(problem: HilbertProblem, g: Field) -> np.ndarray:
    """``H*_g`` at all nodes of ``g``'s grid."""
    return HilbertOperator(problem, g.grid).apply(g)[0]
