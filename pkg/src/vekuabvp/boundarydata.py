"""Rough boundary data: antiderivative paths, Cantor ladders, conjugates.

An :class:`AntiderivativePath` is stored as an absolutely continuous part
sampled at ``n + 1`` nodes of ``[0, 2 pi]`` plus a list of singular terms,
each a coefficient times a continuous singular measure's distribution
function.  Keeping the singular parts symbolic lets the Schwartz integral
treat them exactly instead of through their (very rough) samples.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .diskgrid import BoundarySignal, GridError, UnimodularSignal

TWO_PI = 2.0 * np.pi
# intervals are materialized only up to this depth; deeper ladders are
# resolved to this level for panel quadrature (Fourier data stay exact)
MAX_PANEL_DEPTH = 16
DEFAULT_CANTOR_DEPTH = 12


class SingularMeasure:
    """A measure on ``[0, 2 pi]`` made of uniform pieces on short intervals."""

    def intervals(self):
        """Return ``(left, length, mass)`` arrays of the uniform pieces."""
        raise NotImplementedError

    def __call__(self, theta):
        """Distribution function ``mu([0, theta])``."""
        raise NotImplementedError

    def fourier(self, k):
        """``int exp(-i k t) d mu(t)`` for an array of (possibly real) ``k``."""
        a, ell, m = self.intervals()
        k = np.asarray(k, dtype=float)
        shape = k.shape
        k = k.ravel()
        out = np.zeros(k.shape, dtype=complex)
        for chunk in np.array_split(np.arange(k.size), max(1, k.size * a.size // 4_000_000 + 1)):
            kk = k[chunk][:, None]
            x = kk * ell[None, :]
            # (1 - exp(-i x)) / (i x), -> 1 as x -> 0
            small = np.abs(x) < 1e-8
            xs = np.where(small, 1.0, x)
            avg = np.where(small, 1.0 - 0.5j * x, (1.0 - np.exp(-1j * xs)) / (1j * xs))
            out[chunk] = np.sum(m[None, :] * np.exp(-1j * kk * a[None, :]) * avg, axis=1)
        return out.reshape(shape)

    def near_steps(self, theta, margin: float) -> np.ndarray:
        """True where ``theta`` lies within ``margin`` of a piece of the support."""
        a, ell, _ = self.intervals()
        theta = np.mod(np.atleast_1d(np.asarray(theta, dtype=float)), TWO_PI)
        lo = a - margin
        hi = a + ell + margin
        order = np.argsort(lo)
        lo, hi = lo[order], hi[order]
        hi = np.maximum.accumulate(hi)
        out = np.zeros(theta.shape, dtype=bool)
        for shift in (-TWO_PI, 0.0, TWO_PI):
            t = theta + shift
            idx = np.searchsorted(lo, t, side="right") - 1
            ok = idx >= 0
            out |= ok & (t <= hi[np.clip(idx, 0, None)])
        return out


def _ternary_offsets(depth: int) -> np.ndarray:
    """Left endpoints (in [0, 1]) of the 2**depth middle-thirds intervals."""
    a = np.zeros(1)
    for j in range(1, depth + 1):
        a = np.concatenate([a, a + 2.0 / 3.0 ** j])
    return np.sort(a)


class CantorLadder(SingularMeasure):
    """Middle-thirds Cantor function of finite depth, rescaled to ``[0, 2 pi]``.

    ``C(0) = 0``, ``C(2 pi) = 1``; at depth ``d`` the ladder rises only on
    ``2**d`` intervals of total length ``(2/3)**d * 2 pi``.
    """

    def __init__(self, depth: int):
        if not (1 <= int(depth) <= 30):
            raise GridError("cantor ladder depth out of range (1..30)")
        self.depth = int(depth)
        self._intervals = None

    def __repr__(self):
        return f"CantorLadder(depth={self.depth})"

    def __eq__(self, other):
        return type(other) is type(self) and other.depth == self.depth

    def __hash__(self):
        return hash((type(self).__name__, self.depth))

    def __call__(self, theta):
        x = np.clip(np.asarray(theta, dtype=float) / TWO_PI, 0.0, 1.0)
        scalar = x.ndim == 0
        x = np.atleast_1d(x).copy()
        val = np.zeros_like(x)
        s = 1.0
        live = np.ones(x.shape, dtype=bool)
        for _ in range(self.depth):
            x = np.where(live, 3.0 * x, x)
            s *= 0.5
            mid = live & (x >= 1.0) & (x < 2.0)
            top = live & (x >= 2.0)
            val[mid] += s
            live &= ~mid
            val[top] += s
            x[top] -= 2.0
        val[live] += s * x[live]
        return float(val[0]) if scalar else val

    def intervals(self):
        if self._intervals is None:
            d = min(self.depth, MAX_PANEL_DEPTH)
            left = TWO_PI * _ternary_offsets(d)
            ell = np.full(left.shape, TWO_PI / 3.0 ** d)
            mass = np.full(left.shape, 0.5 ** d)
            self._intervals = (left, ell, mass)
        return self._intervals

    def fourier(self, k):
        k = np.asarray(k, dtype=float)
        out = np.ones(k.shape, dtype=complex)
        for j in range(1, self.depth + 1):
            out *= 0.5 * (1.0 + np.exp(-1j * k * 2.0 * TWO_PI / 3.0 ** j))
        x = k * TWO_PI / 3.0 ** self.depth
        small = np.abs(x) < 1e-8
        xs = np.where(small, 1.0, x)
        out *= np.where(small, 1.0 - 0.5j * x, (1.0 - np.exp(-1j * xs)) / (1j * xs))
        return out


class LadderPair(SingularMeasure):
    """A rising ladder on ``[0, pi]`` followed by its mirror image on ``[pi, 2 pi]``.

    The distribution function is continuous, vanishes at both ends and has
    zero derivative off a null set, so adding it to an antiderivative keeps
    the endpoints and the a.e. derivative unchanged.
    """

    def __init__(self, depth: int):
        self.ladder = CantorLadder(depth)
        self.depth = self.ladder.depth
        self._intervals = None

    def __repr__(self):
        return f"LadderPair(depth={self.depth})"

    def __eq__(self, other):
        return type(other) is type(self) and other.depth == self.depth

    def __hash__(self):
        return hash((type(self).__name__, self.depth))

    def __call__(self, theta):
        t = np.asarray(theta, dtype=float)
        return np.where(t <= np.pi, self.ladder(2.0 * t), self.ladder(2.0 * (TWO_PI - t)))

    def intervals(self):
        if self._intervals is None:
            a, ell, m = self.ladder.intervals()
            up = (0.5 * a, 0.5 * ell, m)
            down = (TWO_PI - 0.5 * (a + ell), 0.5 * ell, -m)
            self._intervals = tuple(np.concatenate([u, d]) for u, d in zip(up, down))
        return self._intervals

    def fourier(self, k):
        c = self.ladder.fourier(0.5 * np.asarray(k, dtype=float))
        return c - np.conj(c)


@dataclass(frozen=True)
class AntiderivativePath:
    """A continuous function on ``[0, 2 pi]``: sampled a.c. part plus singular terms.

    ``base`` holds ``n + 1`` samples at ``2 pi j / n`` (``base[0]`` at 0 and
    ``base[n]`` at ``2 pi``).  ``singular_part`` is a tuple of
    ``(coefficient, SingularMeasure)`` pairs.
    """

    base: np.ndarray
    derivative_signal: Optional[BoundarySignal] = None
    singular_part: tuple = field(default_factory=tuple)

    @property
    def n_theta(self) -> int:
        return self.base.shape[0] - 1

    @property
    def nodes(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n_theta + 1) / self.n_theta

    def values(self) -> np.ndarray:
        """Samples of the full path (a.c. plus singular) at the ``n + 1`` nodes."""
        out = np.array(self.base, dtype=complex if np.iscomplexobj(self.base) else float)
        for c, mu in self.singular_part:
            out = out + c * mu(self.nodes)
        return out

    def jump(self):
        """``Phi(2 pi) - Phi(0)``: nonzero means the path is not closed."""
        j = self.base[-1] - self.base[0]
        for c, mu in self.singular_part:
            j = j + c * (mu(TWO_PI) - mu(0.0))
        return j

    def midpoint_derivative(self) -> np.ndarray:
        """Finite-difference derivative of the a.c. samples at cell midpoints."""
        return np.diff(self.base) / (TWO_PI / self.n_theta)

    def _combine(self, other: "AntiderivativePath", sign: float) -> "AntiderivativePath":
        if other.n_theta != self.n_theta:
            raise GridError("paths have different sample counts")
        sing = list(self.singular_part) + [(sign * c, mu) for c, mu in other.singular_part]
        sig = None
        if self.derivative_signal is not None and other.derivative_signal is not None:
            sig = BoundarySignal(self.derivative_signal.values + sign * other.derivative_signal.values)
        return AntiderivativePath(self.base + sign * other.base, sig, _merge_terms(sing))

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def scaled(self, c) -> "AntiderivativePath":
        sig = None if self.derivative_signal is None else BoundarySignal(c * self.derivative_signal.values)
        return AntiderivativePath(c * self.base, sig, tuple((c * a, mu) for a, mu in self.singular_part))

    def with_singular(self, coefficient, measure: SingularMeasure) -> "AntiderivativePath":
        terms = _merge_terms(list(self.singular_part) + [(coefficient, measure)])
        return AntiderivativePath(self.base, self.derivative_signal, terms)


def _merge_terms(terms) -> tuple:
    merged = {}
    order = []
    for c, mu in terms:
        if mu in merged:
            merged[mu] = merged[mu] + c
        else:
            merged[mu] = c
            order.append(mu)
    return tuple((merged[mu], mu) for mu in order if merged[mu] != 0)


def cantor_ladder(depth: int = DEFAULT_CANTOR_DEPTH) -> CantorLadder:
    return CantorLadder(depth)


def harmonic_conjugate(alpha: BoundarySignal) -> BoundarySignal:
    """Boundary conjugate function via the ``-i sign(k)`` Fourier multiplier.

    The mean and the Nyquist mode are sent to zero.
    """
    v = np.asarray(alpha.values)
    if np.iscomplexobj(v):
        if np.any(np.abs(v.imag) > 0):
            raise GridError("harmonic_conjugate needs a real signal")
        v = v.real
    n = v.shape[0]
    c = np.fft.rfft(v)
    mult = np.full(c.shape, -1j)
    mult[0] = 0.0
    if n % 2 == 0:
        mult[-1] = 0.0
    return BoundarySignal(np.fft.irfft(c * mult, n))


def spectral_primitive(samples: np.ndarray) -> np.ndarray:
    """Periodic antiderivative of the zero-mean part of ``samples``, at the nodes.

    Exact for trigonometric polynomials below the Nyquist frequency; the
    Nyquist mode integrates to zero at the nodes.
    """
    f = np.asarray(samples)
    n = f.shape[0]
    c = np.fft.fft(f) / n
    k = np.fft.fftfreq(n, d=1.0 / n)
    with np.errstate(divide="ignore", invalid="ignore"):
        prim = np.where(k == 0, 0.0, c / (1j * k))
    if n % 2 == 0:
        prim[n // 2] = 0.0
    p = np.fft.ifft(prim) * n
    if not np.iscomplexobj(f):
        p = p.real
    return p - p[0]


def antiderivative(signal: BoundarySignal, weight: Optional[BoundarySignal] = None,
                   closure: Optional[str | int] = None) -> AntiderivativePath:
    """Antiderivative of ``signal * weight`` on ``[0, 2 pi]`` with ``Phi(0) = 0``.

    ``closure`` is ``None``/``"none"`` or ``"cantor"``/``"cantor:<depth>"``/an
    integer depth; a Cantor closure subtracts ``Phi(2 pi) * C(theta)`` so the
    endpoints agree without changing the a.e. derivative.
    """
    f = np.asarray(signal.values)
    if weight is not None:
        weight.check_size(signal.n_theta)
        f = f * np.asarray(weight.values)
    n = f.shape[0]
    mean = np.mean(f)
    if not np.iscomplexobj(f):
        mean = float(mean)
    nodes = TWO_PI * np.arange(n + 1) / n
    periodic = spectral_primitive(f)
    base = mean * nodes + np.concatenate([periodic, periodic[:1]])
    path = AntiderivativePath(base, BoundarySignal(f))
    depth = parse_closure(closure)
    if depth is not None:
        path = close_path(path, depth)
    return path


def parse_closure(closure) -> Optional[int]:
    if closure is None or closure == "none" or closure is False:
        return None
    if isinstance(closure, (int, np.integer)) and not isinstance(closure, bool):
        return int(closure)
    s = str(closure)
    if s == "cantor":
        return DEFAULT_CANTOR_DEPTH
    if s.startswith("cantor:"):
        return int(s.split(":", 1)[1])
    if s.startswith("cantor(") and s.endswith(")"):
        return int(s[7:-1])
    raise GridError(f"unknown closure mode {closure!r}")


def close_path(path: AntiderivativePath, depth: int, rtol: float = 1e-13) -> AntiderivativePath:
    """Equalize endpoints by a Cantor-ladder correction (skipped if already closed)."""
    j = path.jump()
    scale = 1.0 + float(np.max(np.abs(path.base)))
    if abs(j) <= rtol * scale:
        return path
    return path.with_singular(-j, CantorLadder(depth))


def arg_principal(lam: UnimodularSignal) -> BoundarySignal:
    """Principal argument in ``(-pi, pi]`` of each sample."""
    v = np.asarray(lam.values, dtype=complex)
    if np.any(np.abs(v) == 0):
        raise GridError("arg_principal: zero-modulus sample")
    a = np.angle(v)
    a = np.where(a <= -np.pi, np.pi, a)
    return BoundarySignal(a)


# ---------------------------------------------------------------- presets

def _thetas(n):
    return TWO_PI * np.arange(n) / n


def signal_function(spec):
    """Callable ``theta -> value`` for a boundary-signal preset or CSV path.

    Presets: ``const:<c>``, ``coskt:<k>[:<amp>]``, ``sinkt:<k>[:<amp>]``,
    ``step:<a>:<b>`` (``a`` on ``[0, pi)``, ``b`` on ``[pi, 2 pi)``).  CSV
    data are interpolated linearly and periodically.
    """
    if isinstance(spec, (int, float)):
        c = float(spec)
        return lambda t: np.full(np.shape(t), c)
    s = str(spec)
    head, _, rest = s.partition(":")
    args = rest.split(":") if rest else []
    try:
        if head == "const":
            c = float(args[0])
            return lambda t: np.full(np.shape(t), c)
        if head in ("coskt", "sinkt"):
            k = float(args[0])
            amp = float(args[1]) if len(args) > 1 else 1.0
            fn = np.cos if head == "coskt" else np.sin
            return lambda t: amp * fn(k * np.asarray(t, dtype=float))
        if head == "step":
            a, b = float(args[0]), float(args[1])
            return lambda t: np.where(np.mod(np.asarray(t, dtype=float), TWO_PI) < np.pi, a, b)
    except (IndexError, ValueError) as exc:
        raise GridError(f"bad signal preset {s!r}") from exc
    if s.endswith(".csv"):
        return _csv_function(s)
    raise GridError(f"unknown signal preset {s!r}")


def signal_from_spec(spec, n_theta: int) -> BoundarySignal:
    """Real or complex boundary signal sampled at the ``n_theta`` nodes (see :func:`signal_function`)."""
    if isinstance(spec, BoundarySignal):
        spec.check_size(n_theta)
        return spec
    s = str(spec)
    if s.endswith(".csv"):
        return read_signal_csv(s, n_theta)
    return BoundarySignal(signal_function(spec)(_thetas(n_theta)))


def unimodular_function(spec):
    """Callable ``theta -> unimodular value`` for a preset or CSV path.

    Presets: ``one``, ``phase:<a>`` (``e^{ia}``), ``expikt:<k>``,
    ``phasestep:<a>:<b>``, ``phasesin:<amp>:<k>`` (``exp(i amp sin k t)``),
    ``normal`` (inner normal ``-e^{it}``) and ``rotnormal:<angle>``.
    """
    s = str(spec)
    head, _, rest = s.partition(":")
    args = rest.split(":") if rest else []

    def arr(t):
        return np.asarray(t, dtype=float)

    try:
        if s in ("one", "const:1"):
            return lambda t: np.ones(np.shape(t), dtype=complex)
        if head == "phase":
            a = float(args[0])
            return lambda t: np.full(np.shape(t), np.exp(1j * a))
        if head == "expikt":
            k = float(args[0])
            return lambda t: np.exp(1j * k * arr(t))
        if head == "phasestep":
            a, b = float(args[0]), float(args[1])
            return lambda t: np.exp(1j * np.where(np.mod(arr(t), TWO_PI) < np.pi, a, b))
        if head == "phasesin":
            amp, k = float(args[0]), float(args[1])
            return lambda t: np.exp(1j * amp * np.sin(k * arr(t)))
        if head == "normal":
            return lambda t: -np.exp(1j * arr(t))
        if head == "rotnormal":
            c = float(args[0])
            return lambda t: -np.exp(1j * (arr(t) + c))
    except (IndexError, ValueError) as exc:
        raise GridError(f"bad unimodular preset {s!r}") from exc
    if s.endswith(".csv"):
        table = _csv_function(s)

        def unit(t):
            w = np.asarray(table(t), dtype=complex)
            return w / np.abs(w)

        return unit
    raise GridError(f"unknown unimodular preset {s!r}")


def unimodular_from_spec(spec, n_theta: int) -> UnimodularSignal:
    """Unimodular signal sampled at the ``n_theta`` nodes (see :func:`unimodular_function`)."""
    if isinstance(spec, UnimodularSignal):
        spec.check_size(n_theta)
        return spec
    s = str(spec)
    if s.endswith(".csv"):
        sig = read_signal_csv(s, n_theta)
        v = np.asarray(sig.values, dtype=complex)
        return UnimodularSignal(v / np.abs(v))
    return UnimodularSignal(unimodular_function(spec)(_thetas(n_theta)))


def _read_csv(path):
    th, vals = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            th.append(float(row["theta"]))
            vals.append(float(row["value_re"]) + 1j * float(row.get("value_im", 0.0) or 0.0))
    if not th:
        raise GridError(f"empty signal file {path}")
    th = np.mod(np.asarray(th), TWO_PI)
    vals = np.asarray(vals)
    order = np.argsort(th)
    return th[order], vals[order]


def _csv_function(path):
    """Piecewise-constant periodic callable through ``theta,value_re,value_im`` rows."""
    th, vals = _read_csv(path)
    real = bool(np.all(vals.imag == 0))

    def f(t):
        idx = np.searchsorted(th, np.mod(np.asarray(t, dtype=float), TWO_PI), side="right") - 1
        out = vals[np.mod(idx, th.size)]
        return out.real if real else out

    return f


def read_signal_csv(path, n_theta: int) -> BoundarySignal:
    """Read ``theta,value_re,value_im`` rows, resampled piecewise-constantly."""
    return BoundarySignal(_csv_function(path)(_thetas(n_theta)))


def write_signal_csv(sig: BoundarySignal, path) -> None:
    v = np.asarray(sig.values, dtype=complex)
    with open(path, "w", newline="\n") as fh:
        fh.write("theta,value_re,value_im\n")
        for t, x in zip(sig.thetas, v):
            fh.write(f"{t:.17g},{x.real:.17g},{x.imag:.17g}\n")
