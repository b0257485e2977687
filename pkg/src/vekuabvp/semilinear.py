"""Fixed-point solvers for ``g = h q(H*_g)`` and ``G = H Q(P*_G)``.

Damped Picard iteration with continuation in ``tau``: each stage solves
``source = tau * coefficient * nl(operator(source))`` warm-started from the
previous stage.  The a-priori bound that drives the existence argument is
monitored along the way: with ``|f| <= M ||g||_p + K`` on the support, every
iterate must obey ``||tau h q(f)||_p <= ||h||_p q_*(M ||g||_p + K)``, and
sublinearity of ``q_*`` caps ``||g||_p`` at the largest ``t`` with
``t <= ||h||_p q_*(M t + K)``.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .diskgrid import Field, lp_norm

PRESET_KINDS = ("power_clamped", "signed_power", "exp_clamped", "linear_saturating", "constant", "custom-table")
_REAL_ONLY = ("power_clamped", "exp_clamped", "custom-table")


class NonlinearityError(ValueError):
    pass


class SolverDivergence(RuntimeError):
    """A continuation stage exhausted its iteration budget."""

    def __init__(self, message: str, tau: float, report: "SolveReport"):
        super().__init__(message)
        self.tau = tau
        self.report = report


@dataclass(frozen=True)
class Nonlinearity:
    """A sublinear nonlinearity ``q`` (vekua mode) or ``Q`` (poisson mode).

    Parameters
    ----------
    kind : str
        ``power_clamped`` ``max(t, 0)**beta``; ``signed_power``
        ``|w|**(beta - 1) w``; ``exp_clamped`` ``exp(-max(t, 0))``;
        ``linear_saturating`` ``w / (1 + |w|)``; ``constant`` ``q = beta``;
        ``custom-table`` piecewise-linear through ``table`` with constant
        extrapolation.
    beta : float
        Exponent (``0 < beta < 1`` for the power presets) or the constant.
    table : tuple of (t, q) pairs, optional
    """

    kind: str
    beta: float = 0.5
    table: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in PRESET_KINDS:
            raise NonlinearityError(f"unknown nonlinearity {self.kind!r}")
        if self.kind in ("power_clamped", "signed_power") and not 0.0 < self.beta < 1.0:
            raise NonlinearityError("power presets need 0 < beta < 1")
        if self.kind == "custom-table":
            if not self.table or len(self.table) < 2:
                raise NonlinearityError("custom-table needs at least two (t, q) pairs")
            t = np.array([p[0] for p in self.table], dtype=float)
            if np.any(np.diff(t) <= 0):
                raise NonlinearityError("custom-table abscissae must increase")

    @property
    def domain(self) -> str:
        return "real" if self.kind in _REAL_ONLY else "complex"

    def __call__(self, w):
        w = np.asarray(w)
        if self.domain == "real" and np.iscomplexobj(w):
            raise NonlinearityError(f"{self.kind} takes real arguments")
        k, b = self.kind, self.beta
        if k == "power_clamped":
            return np.maximum(w, 0.0) ** b
        if k == "signed_power":
            a = np.abs(w)
            return np.where(a > 0, np.where(a > 0, a, 1.0) ** (b - 1.0) * w, 0.0 * w)
        if k == "exp_clamped":
            return np.exp(-np.maximum(w, 0.0))
        if k == "linear_saturating":
            return w / (1.0 + np.abs(w))
        if k == "constant":
            return np.full(w.shape, b, dtype=w.dtype if np.iscomplexobj(w) else float)
        t = np.array([p[0] for p in self.table], dtype=float)
        q = np.array([p[1] for p in self.table], dtype=float)
        return np.interp(w, t, q)

    def majorant(self, t):
        """``q_*(t) = max_{|w| <= t} |q(w)|`` (over an interval for real-domain kinds)."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise NonlinearityError("majorant needs t >= 0")
        k, b = self.kind, self.beta
        if k in ("power_clamped", "signed_power"):
            return t ** b
        if k == "exp_clamped":
            return np.ones_like(t)
        if k == "linear_saturating":
            return t / (1.0 + t)
        if k == "constant":
            return np.full_like(t, abs(b))
        return np.vectorize(self._sampled_majorant, otypes=[float])(t)

    def _sampled_majorant(self, t: float) -> float:
        knots = np.array([p[0] for p in self.table], dtype=float)
        s = np.concatenate([np.linspace(-t, t, 2001), knots[np.abs(knots) <= t]])
        return float(np.max(np.abs(self(s))))

    def sublinearity_ratios(self, kmax: int = 40) -> np.ndarray:
        t = 2.0 ** np.arange(kmax + 1)
        return self.majorant(t) / t

    def certify(self, kmax: int = 40) -> bool:
        """Numerical check that ``q_*(t) / t -> 0`` on the ladder ``t = 2**k``."""
        r = self.sublinearity_ratios(kmax)
        tail = r[kmax // 4:]
        monotone = np.all(np.diff(tail) <= 1e-12 * np.max(tail))
        return bool(monotone and r[-1] <= 0.9 * r[kmax // 2] or r[-1] < 1e-9)


@dataclass(frozen=True)
class SolverConfig:
    p: float = 4.0
    damping: float = 0.5
    tol: float = 1e-8
    tau_steps: tuple = (0.25, 0.5, 0.75, 1.0)
    max_iter: int = 200

    def __post_init__(self):
        if not self.p > 2.0:
            raise ValueError("p must exceed 2")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        taus = tuple(float(t) for t in self.tau_steps)
        if not taus or abs(taus[-1] - 1.0) > 1e-15 or any(t <= 0 or t > 1 for t in taus):
            raise ValueError("tau schedule must lie in (0, 1] and end at 1")
        if any(b <= a for a, b in zip(taus, taus[1:])):
            raise ValueError("tau schedule must increase")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be positive")
        object.__setattr__(self, "tau_steps", taus)


@dataclass
class BoundVerdict:
    verdict: str
    flagged: list
    M: float
    K: float
    bound: float
    margin: float


@dataclass
class SolveReport:
    """Solver diagnostics; serialized to JSON by :meth:`to_json`."""

    iterations: list = field(default_factory=list)
    residual_fixed_point: float = float("nan")
    residual_pde: float = float("nan")
    boundary_residual_median: float = float("nan")
    norm_history: list = field(default_factory=list)
    tau_schedule: list = field(default_factory=list)
    bound_monitor: Optional[BoundVerdict] = None
    sup_history: list = field(default_factory=list)
    map_norm_history: list = field(default_factory=list)
    coefficient_norm: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "iterations": list(self.iterations),
            "residual_fixed_point": self.residual_fixed_point,
            "residual_pde": self.residual_pde,
            "boundary_residual_median": self.boundary_residual_median,
            "norm_history": list(self.norm_history),
            "tau_schedule": list(self.tau_schedule),
            "bound_monitor": None if self.bound_monitor is None else asdict(self.bound_monitor),
        }
        d.update(self.extra)
        return d

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if np.isfinite(v) else str(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def picard_continuation(mode: str, coefficient: Field, nl: Nonlinearity, operator,
                        config: SolverConfig = SolverConfig(), initial: Optional[Field] = None,
                        log=None):
    """Damped Picard iteration with continuation in ``tau``.

    Parameters
    ----------
    mode : {"vekua", "poisson"}
    coefficient : Field
        ``h`` (complex, vekua) or ``H`` (real, poisson) with a support radius.
    nl : Nonlinearity
    operator : HilbertOperator or PoincareOperator
        Anything with ``apply(source) -> (field on grid, Phi_g)``.
    config : SolverConfig
    initial : Field, optional
        Starting source (default zero).

    Returns
    -------
    source : Field
    solution : ndarray
        ``H*_g`` or ``P*_G`` on the grid.
    report : SolveReport
    """
    if mode not in ("vekua", "poisson"):
        raise ValueError(f"unknown mode {mode!r}")
    if coefficient.support_radius is None or coefficient.support_radius >= 1.0:
        raise ValueError("coefficient needs a support radius below 1")
    if not nl.certify():
        raise NonlinearityError(f"{nl.kind} fails the sublinearity certificate")
    if mode == "vekua" and nl.domain == "real":
        raise NonlinearityError(f"{nl.kind} is real-valued; vekua mode needs a complex-domain nonlinearity")
    if mode == "poisson" and np.iscomplexobj(coefficient.values):
        raise ValueError("poisson coefficient must be real")

    h = coefficient.values
    dtype = complex if mode == "vekua" else float
    mask = coefficient.grid.inside(coefficient.support_radius)
    p, omega = config.p, config.damping
    rho = coefficient.support_radius

    def as_field(v):
        return Field(coefficient.grid, np.where(mask, v, 0).astype(dtype), rho)

    g = as_field(np.zeros(coefficient.grid.shape, dtype)) if initial is None else as_field(initial.values)
    report = SolveReport(tau_schedule=list(config.tau_steps), coefficient_norm=lp_norm(coefficient, p))
    sol = None
    for tau in config.tau_steps:
        for it in range(1, config.max_iter + 1):
            sol, _ = operator.apply(g)
            arg = sol if mode == "vekua" else np.real(sol)
            F = np.where(mask, tau * h * nl(np.where(mask, arg, 0)), 0).astype(dtype)
            gn = lp_norm(g, p)
            diff = lp_norm(g.with_values(g.values - F), p)
            res = diff / max(1.0, gn)
            report.norm_history.append(gn)
            report.sup_history.append(float(np.max(np.abs(arg[mask]))) if mask.any() else 0.0)
            report.map_norm_history.append(lp_norm(g.with_values(F), p))
            if log is not None:
                log(f"tau={tau:g} it={it} residual={res:.3e} norm={gn:.6g}")
            if res < config.tol:
                break
            g = as_field((1.0 - omega) * g.values + omega * F)
        else:
            report.iterations.append(config.max_iter)
            report.residual_fixed_point = res
            raise SolverDivergence(f"stage tau={tau:g} did not converge in {config.max_iter} iterations",
                                   tau, report)
        report.iterations.append(it)
        report.residual_fixed_point = res
    if np.any(g.values[~mask] != 0):
        raise AssertionError("source escaped the coefficient support")
    report.bound_monitor = bound_monitor(report, report.coefficient_norm, nl)
    return g, sol, report


def bound_monitor(report: SolveReport, coefficient_norm: float, nl: Nonlinearity,
                  M: Optional[float] = None, K: Optional[float] = None) -> BoundVerdict:
    """Check the a-priori bound chain along the recorded iterates.

    ``K`` defaults to the sup of the solution at the zero source (the first
    iterate of a cold start) and ``M`` to the smallest slope with
    ``sup|f_n| <= M ||g_n||_p + K`` over the run.  Iterate ``n`` is flagged
    when ``||tau h q(f_n)||_p > ||h||_p q_*(M ||g_n||_p + K)`` or when
    ``||g_n||_p`` exceeds the largest ``t`` with
    ``t <= ||h||_p q_*(M t + K)``.
    """
    norms = np.asarray(report.norm_history, dtype=float)
    sups = np.asarray(report.sup_history, dtype=float)
    maps = np.asarray(report.map_norm_history, dtype=float)
    if norms.size == 0:
        return BoundVerdict("H3 satisfied", [], 0.0, 0.0, 0.0, float("inf"))
    if coefficient_norm == 0.0:
        return BoundVerdict("H3 satisfied", [], 0.0, 0.0, 0.0, float("inf"))
    if K is None:
        K = float(sups[0]) if norms[0] == 0 else 0.0
    if M is None:
        pos = norms > 0
        M = float(np.max((sups[pos] - K) / norms[pos])) if pos.any() else 0.0
        M = max(M, 0.0)
    hn = coefficient_norm
    cap = hn * nl.majorant(M * norms + K)
    flagged = [int(i) for i in np.flatnonzero(maps > cap * (1 + 1e-9) + 1e-300)]
    # largest t with t <= ||h|| q_*(M t + K), scanned on a geometric ladder
    ts = np.concatenate([[0.0], np.geomspace(1e-12, 1e12, 2401)])
    ok = ts <= hn * nl.majorant(M * ts + K)
    bound = float(ts[np.flatnonzero(ok)[-1]]) if ok.any() else 0.0
    if ok[-1]:
        bound = float("inf")
    over = [int(i) for i in np.flatnonzero(norms > bound * (1 + 1e-9))]
    flagged = sorted(set(flagged) | set(over))
    margin = float(bound - norms.max()) if np.isfinite(bound) else float("inf")
    verdict = "H3 satisfied" if not flagged else "H3 violated at flagged iterates"
    return BoundVerdict(verdict, flagged, M, K, bound, margin)
