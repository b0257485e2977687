"""End-to-end runs: config -> solve -> verification -> artifacts.

Artifacts are pure functions of the configuration: no timestamps or
timings are written, JSON keys are sorted and floats are printed with
round-trip precision.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .. import BACKEND, __version__
from ..boundarydata import TWO_PI, BoundarySignal, UnimodularSignal, signal_function, unimodular_function
from ..diskgrid import Field, GridError, PolarGrid, dbar_fd, laplacian_fd, make_grid
from ..domains import ChartError, ConformalChart, parse_chart, pullback_boundary, pullback_poisson, \
    pullback_vekua, pushforward_solution
from ..hilbert import HilbertError, HilbertOperator, HilbertProblem, SingularConfig
from ..poincare import PoincareError, PoincareOperator, PoincareProblem, inner_normal
from ..semilinear import NonlinearityError, SolveReport, SolverDivergence, _jsonable, picard_continuation
from .coefficients import parse_coefficient
from .config import ConfigError, RunConfig
from .probes import ConeProbe, angular_limit_estimate, near_angles, probe_angles, split_values, stack_points
from .residuals import pde_residual, weighted_l2

log = logging.getLogger("vekuabvp")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_VERIFY = 4

FIELD_COLUMNS = ("r", "theta", "x", "y", "xi_x", "xi_y", "solution_re", "solution_im",
                 "source_re", "source_im", "coefficient_re", "coefficient_im")
BOUNDARY_COLUMNS = ("theta", "target", "estimate", "spread", "residual")


# ------------------------------------------------------------- case setup

@dataclass
class Case:
    """Everything the solver and the verifier need, in disk coordinates.

    ``sign`` is ``-1`` under the substitution ``V = -U``: the solver works
    with ``V`` and reported quantities are mapped back to ``U``.
    """

    config: RunConfig
    grid: PolarGrid
    chart: ConformalChart
    problem: object
    coefficient: Field
    domain_coefficient: Callable
    target: Callable
    weight: Callable
    sign: float = 1.0
    discontinuities: np.ndarray = field(default_factory=lambda: np.zeros(0))


def _discontinuity_marks(spec) -> list:
    head = str(spec).partition(":")[0]
    if head in ("step", "phasestep"):
        return [0.0, np.pi]
    return []


def _to_disk_angles(chart: ConformalChart, marks, param: str) -> np.ndarray:
    """Disk angles of boundary marks given in the data parameter."""
    marks = np.asarray(marks, dtype=float)
    if marks.size == 0 or chart.is_identity:
        return marks
    if param != "arclength":
        return np.zeros(0)
    tf = TWO_PI * np.arange(8193) / 8192
    s = chart.arclength_parameter(tf)
    s[-1] = TWO_PI
    return np.interp(np.mod(marks, TWO_PI), s, tf)


def _boundary(func, chart, n, role, param):
    """Disk-side signal and its pointwise callable for one piece of data."""
    sig = pullback_boundary(func, chart, n, role, param)
    return sig, (lambda t: pullback_boundary(func, chart, n, role, param, thetas=np.atleast_1d(t)))


def _coefficient_field(cfg: RunConfig, grid: PolarGrid, chart: ConformalChart, vekua: bool):
    func, is_complex, extent = parse_coefficient(cfg["coefficient.spec"])
    rho = cfg["coefficient.support_radius"]
    if not vekua and is_complex:
        raise ConfigError("poisson problems need a real coefficient")
    h = func
    if extent is None:
        # constants are cut at the support radius in disk coordinates; the
        # pullbacks evaluate ``h`` on the node array, so the mask lines up
        mask = grid.inside(rho)
        h = lambda w: np.where(mask, func(w), 0)  # noqa: E731
    try:
        if vekua:
            return pullback_vekua(h, chart, grid, rho), func
        return pullback_poisson(h, chart, grid, rho), func
    except ChartError as exc:
        raise ConfigError(f"parameter out of range: {exc}") from None


def _make_problem(cls, *args, **kwargs):
    """Construct a problem; data the construction cannot accept is a configuration error."""
    try:
        return cls(*args, **kwargs)
    except HilbertError as exc:
        raise ConfigError(f"unusable boundary data: {exc}") from None


def build_case(cfg: RunConfig) -> Case:
    """Grid, chart, pulled-back data and problem for a configuration."""
    grid = make_grid(cfg["grid.n_r"], cfg["grid.n_theta"], cfg["grid.r_max"], cfg["grid.support_radius"])
    chart = parse_chart(cfg["chart.spec"], grid.r_max)
    n, kind, param = grid.n_theta, cfg.kind, cfg["data.param"]
    singular = SingularConfig(cfg["hilbert.singular_depth"], cfg["hilbert.singular_enabled"],
                              cfg["hilbert.singular_amplitude"])
    closure = cfg["data.closure"]
    sign = -1.0 if cfg["nonlinearity.substitution"] == "negate" else 1.0
    phi_func = signal_function(cfg["data.phi"])
    marks = _discontinuity_marks(cfg["data.phi"])

    if kind in ("hilbert", "dirichlet"):
        lam_spec = cfg["data.lambda"] if kind == "hilbert" else "one"
        if kind == "hilbert":
            marks += _discontinuity_marks(lam_spec)
        lam_sig, lam_at = _boundary(unimodular_function(lam_spec), chart, n, "lambda", param)
        phi_sig, phi_at = _boundary(phi_func, chart, n, "phi", param)
        problem = _make_problem(HilbertProblem, lam_sig, phi_sig, closure=closure, singular=singular)
        coefficient, dom = _coefficient_field(cfg, grid, chart, vekua=True)
        return Case(cfg, grid, chart, problem, coefficient, dom, phi_at,
                    lambda t: np.conj(lam_at(t)), 1.0, _to_disk_angles(chart, marks, param))

    phi_sig, phi_at = _boundary(phi_func, chart, n, "phi_poincare", param)
    if kind == "neumann":
        nu_sig = inner_normal(n)
        nu_at = lambda t: -np.exp(1j * np.asarray(t, dtype=float))  # noqa: E731
    else:
        spec = cfg["data.nu"]
        if str(spec).partition(":")[0] in ("normal", "rotnormal"):
            # a fixed rotation of the inner normal is conformally invariant
            f = unimodular_function(spec)
            nu_sig = UnimodularSignal(f(grid.thetas))
            nu_at = f
        else:
            nu_sig, nu_at = _boundary(unimodular_function(spec), chart, n, "nu", param)
        marks += _discontinuity_marks(spec)
    problem = _make_problem(PoincareProblem, nu_sig, BoundarySignal(sign * phi_sig.values),
                            closure=closure, singular=singular)
    if np.any(problem.normal_positivity() <= 0):
        raise ConfigError("direction field must point into the disk (Re{n conj(nu)} > 0)")
    coefficient, dom = _coefficient_field(cfg, grid, chart, vekua=False)
    coefficient = coefficient.with_values(sign * coefficient.values)
    return Case(cfg, grid, chart, problem, coefficient, dom, phi_at, nu_at, sign,
                _to_disk_angles(chart, marks, param))


# ------------------------------------------------------------------ solve

@dataclass
class Solution:
    case: Case
    source: Field
    values: np.ndarray
    report: SolveReport
    operator: object
    Phi_g: object
    probes: list
    normal_points: Optional[np.ndarray] = None


def solve_case(case: Case) -> Solution:
    """Run the fixed-point solver (or a single application for linear problems)."""
    cfg = case.config
    v = cfg.tree["verify"]
    probes = [ConeProbe(t, v["aperture"], v["rays"], tuple(v["distances"]))
              for t in probe_angles(v["probes"])]
    pts = stack_points(probes)
    normal_pts = None
    if cfg.solver_mode == "vekua":
        op = HilbertOperator(case.problem, case.grid, pts)
    else:
        if cfg.kind == "neumann":
            ts = np.asarray(list(v["distances"]) + [v["normal_reference"]])
            th = probe_angles(v["probes"])
            normal_pts = ((1.0 - ts)[:, None] * np.exp(1j * th)[None, :]).ravel()
        op = PoincareOperator(case.problem, case.grid, normal_pts, pts)
    nl = cfg.nonlinearity()
    if nl is None:
        src = case.coefficient
        values, Phi_g = op.apply(src)
        report = SolveReport(coefficient_norm=0.0)
        report.residual_fixed_point = 0.0
    else:
        src, values, report = picard_continuation(cfg.solver_mode, case.coefficient, nl, op,
                                                  cfg.solver_config(), log=log.debug)
        Phi_g = op.Phi_g(src)
    return Solution(case, src, values, report, op, Phi_g, probes, normal_pts)


# ------------------------------------------------------------ verification

def _ladder_measures(sol: Solution) -> list:
    p = sol.case.problem
    phi = p.Phi if isinstance(p, HilbertProblem) else p.hilbert_sub.Phi
    return sorted({mu for _, mu in list(phi.singular_part) + list(sol.Phi_g.singular_part)}, key=repr)


def boundary_suite(sol: Solution, extra_measures=()) -> dict:
    """Angular-limit estimates of the boundary functional at every probe."""
    case, cfg = sol.case, sol.case.config
    v = cfg.tree["verify"]
    if cfg.solver_mode == "vekua":
        raw = sol.operator.at_points(sol.source, sol.Phi_g)
    else:
        raw = 2.0 * sol.operator.dz_at_points(sol.source, sol.Phi_g)
    thetas = np.array([p.theta0 for p in sol.probes])
    w = np.asarray(case.weight(thetas), dtype=complex)
    target = np.asarray(case.target(thetas), dtype=float)
    values = split_values(raw, sol.probes)
    rows = []
    for k, (p, vals) in enumerate(zip(sol.probes, values)):
        functional = case.sign * np.real(w[k] * vals)
        est, spread = angular_limit_estimate(functional, p)
        rows.append((p.theta0, float(target[k]), est, spread, abs(est - float(target[k]))))
    excluded = near_angles(thetas, case.discontinuities, v["discontinuity_margin"])
    measures = list(_ladder_measures(sol)) + list(extra_measures)
    near = np.zeros(thetas.shape, dtype=bool)
    for mu in measures:
        near |= mu.near_steps(thetas, v["ladder_margin"])
    res = np.array([r[4] for r in rows])
    regular = ~excluded
    off = regular & ~near
    return {
        "rows": rows,
        "probes": int(thetas.size),
        "excluded_discontinuity": int(excluded.sum()),
        "near_ladder": int((near & regular).sum()),
        "ladders": [repr(mu) for mu in measures],
        "median_residual": float(np.median(res[regular])) if regular.any() else float("nan"),
        "median_residual_off_ladder": float(np.median(res[off])) if off.any() else float("nan"),
        "max_residual_off_ladder": float(np.max(res[off])) if off.any() else float("nan"),
        "distance": float(v["distances"][-1]),
        "excluded_mask": excluded,
        "near_mask": near,
    }


def neumann_chain(sol: Solution) -> dict:
    """Three limits along the normal: ``U`` itself, the difference quotient, ``dU/dn``."""
    v = sol.case.config.tree["verify"]
    th = probe_angles(v["probes"])
    U = sol.case.sign * sol.operator.at_points(sol.source, sol.Phi_g)
    U = U.reshape(len(v["distances"]) + 1, th.size)
    t, t_ref = v["distances"][-1], v["normal_reference"]
    target = np.asarray(sol.case.target(th), dtype=float)
    quotient = (U[-2] - U[-1]) / (t - t_ref)
    return {
        "limit_change_median": float(np.median(np.abs(U[-2] - U[-1]))),
        "quotient_residual_median": float(np.median(np.abs(quotient - target))),
        "distance": float(t),
        "reference_distance": float(t_ref),
    }


def _solution_output(sol: Solution):
    """Solution, source and coefficient in the variables of the stated equation."""
    s = sol.case.sign
    return s * sol.values, s * sol.source.values, s * sol.case.coefficient.values


def residuals(sol: Solution) -> dict:
    cfg = sol.case.config
    r = cfg["verify.residual_radius"]
    nl = cfg.nonlinearity()
    out = {"residual_pde": pde_residual(cfg.solver_mode, sol.values, sol.case.coefficient, nl, r)}
    if sol.case.sign < 0 and nl is not None:
        # the equation before substitution: Delta U = H e^U
        U, _, H = _solution_output(sol)
        Hf = sol.case.coefficient.with_values(H)
        out["residual_pde_original"] = pde_residual("poisson", U, Hf, np.exp, r)
        supp = sol.case.grid.inside(sol.case.coefficient.support_radius) & (H != 0)
        out["clamp_active_fraction"] = float(np.mean(np.real(sol.values)[supp] < 0)) if supp.any() else 0.0
    if not sol.case.chart.is_identity:
        out["residual_pde_domain"] = domain_residual(sol)
    return out


def domain_residual(sol: Solution) -> float:
    """PDE residual in domain coordinates on a polar grid around ``C(0)``.

    The disk solution is pushed forward by spectral interpolation and
    differenced on a grid of radius ``0.7 dist(C(0), boundary)``.
    """
    case, cfg = sol.case, sol.case.config
    chart = case.chart
    center = complex(chart(np.array([0.0]))[0])
    ring = chart.boundary_points(TWO_PI * np.arange(1024) / 1024)
    scale = 0.7 * float(np.min(np.abs(ring - center))) / cfg["grid.r_max"]
    local = make_grid(cfg["grid.n_r"], cfg["grid.n_theta"], cfg["grid.r_max"], cfg["grid.r_max"])
    xi = center + scale * local.nodes
    out_values, _, _ = _solution_output(sol)
    disk_field = Field(case.grid, out_values)
    u = pushforward_solution(disk_field, chart, xi.ravel()).reshape(local.shape)
    c = np.asarray(case.domain_coefficient(xi))
    nl = cfg.nonlinearity()
    if cfg.solver_mode == "vekua":
        D = dbar_fd(local, u.astype(complex)) / scale
        rhs = c * (1.0 if nl is None else nl(u))
    else:
        u = np.real(u)
        D = laplacian_fd(local, u) / scale ** 2
        if nl is None:
            rhs = np.real(c)
        elif case.sign < 0:
            rhs = np.real(c) * np.exp(u)
        else:
            rhs = np.real(c) * nl(u)
    mask = local.inside(cfg["verify.residual_radius"]) & np.isfinite(D)
    return weighted_l2(local, D - rhs, mask) / (weighted_l2(local, rhs, mask) + 1e-30)


def verification(cfg: RunConfig, report: dict) -> dict:
    v = cfg.tree["verify"]
    checks = {}

    def add(name, value, tol, below=True):
        ok = bool(np.isfinite(value) and (value < tol if below else value > tol))
        checks[name] = {"value": value, "tolerance": tol, "passed": ok}

    solve = report["solve"]
    if cfg.nonlinearity() is not None:
        add("fixed_point_residual", solve["residual_fixed_point"], v["fixed_point_tol"])
        bm = solve.get("bound_monitor") or {}
        checks["bound_monitor"] = {"value": bm.get("verdict"), "tolerance": "H3 satisfied",
                                   "passed": bm.get("verdict") == "H3 satisfied"}
    if cfg.nonlinearity() is not None or cfg["coefficient.spec"] != "zero":
        add("pde_residual", solve["residual_pde"], v["pde_tol"])
        if "residual_pde_domain" in solve:
            add("pde_residual_domain", solve["residual_pde_domain"], v["pde_tol"])
    add("boundary_median", report["boundary"]["median_residual_off_ladder"], v["boundary_tol"])
    if "neumann_chain" in report:
        nc = report["neumann_chain"]
        add("normal_limit_change", nc["limit_change_median"], v["boundary_tol"])
        add("normal_quotient", nc["quotient_residual_median"], v["boundary_tol"])
    return {"checks": checks, "passed": all(c["passed"] for c in checks.values())}


# --------------------------------------------------------------- artifacts

def _fmt(x) -> str:
    return repr(float(x))


def fields_csv(sol: Solution) -> str:
    grid = sol.case.grid
    z = grid.nodes
    xi = sol.case.chart(z)
    u, g, c = _solution_output(sol)
    cols = [np.repeat(grid.radii[:, None], grid.n_theta, 1), np.repeat(grid.thetas[None, :], grid.n_r, 0),
            z.real, z.imag, xi.real, xi.imag, np.real(u), np.imag(u), np.real(g), np.imag(g),
            np.real(c), np.imag(c)]
    buf = io.StringIO()
    buf.write(",".join(FIELD_COLUMNS) + "\n")
    flat = [np.asarray(col, dtype=float).ravel() for col in cols]
    for row in zip(*flat):
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    return buf.getvalue()


def boundary_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BOUNDARY_COLUMNS)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def dump_json(data: dict) -> str:
    return json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n"


def _write(out_dir, name, text):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, name), "w", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------- pipeline

@dataclass
class PipelineResult:
    exit_code: int
    report: dict
    solution: Optional[Solution] = None
    fields: Optional[str] = None
    boundary: Optional[str] = None


def _error_block(exc: Exception, code: int) -> dict:
    return {"type": type(exc).__name__, "message": str(exc), "exit_code": code}


def run_pipeline(config, out_dir=None) -> PipelineResult:
    """Solve, verify and (optionally) write ``report.json``, ``fields.csv``, ``boundary.csv``.

    Parameters
    ----------
    config : RunConfig or dict
    out_dir : path, optional
        Directory for the artifacts; nothing is written if omitted.

    Returns
    -------
    PipelineResult
        ``exit_code`` is 0 on success, 2 for configuration errors, 3 if
        the solver did not converge and 1 for any other failure.  A failed
        verification is recorded in the report but not in the exit code
        (see ``verify`` in the CLI).
    """
    report = {"version": __version__, "backend": BACKEND, "status": "ok", "error": None}
    try:
        cfg = config if isinstance(config, RunConfig) else RunConfig.from_dict(config)
        report["config"] = cfg.to_dict()
        case = build_case(cfg)
        sol = solve_case(case)
        solve = sol.report.to_dict()
        solve.update(residuals(sol))
        bnd = boundary_suite(sol)
        solve["residual_pde"] = solve.get("residual_pde", sol.report.residual_pde)
        solve["boundary_residual_median"] = bnd["median_residual_off_ladder"]
        report["solve"] = solve
        report["boundary"] = {k: v for k, v in bnd.items() if k not in ("rows", "excluded_mask", "near_mask")}
        report["boundary"]["table"] = [
            {"theta": r[0], "target": r[1], "estimate": r[2], "spread": r[3], "residual": r[4],
             "excluded": bool(e), "near_ladder": bool(nr)}
            for r, e, nr in zip(bnd["rows"], bnd["excluded_mask"], bnd["near_mask"])]
        if cfg.kind == "neumann":
            report["neumann_chain"] = neumann_chain(sol)
        if sol.case.sign < 0:
            report["substitution"] = "V = -U solved with exp_clamped; outputs are U"
        report["verification"] = verification(cfg, report)
        result = PipelineResult(EXIT_OK, report, sol, fields_csv(sol), boundary_csv(bnd["rows"]))
    except (ConfigError, ChartError) as exc:
        result = _failed(report, exc, EXIT_CONFIG)
    except GridError as exc:
        code = EXIT_CONFIG if "out of range" in str(exc) else EXIT_ERROR
        result = _failed(report, exc, code)
    except SolverDivergence as exc:
        report["solve"] = exc.report.to_dict()
        result = _failed(report, exc, EXIT_DIVERGED)
    except (HilbertError, PoincareError, NonlinearityError, ValueError, ArithmeticError) as exc:
        result = _failed(report, exc, EXIT_ERROR)
    report["exit_code"] = result.exit_code
    if out_dir is not None:
        _write(out_dir, "report.json", dump_json(report))
        if result.fields is not None:
            _write(out_dir, "fields.csv", result.fields)
            _write(out_dir, "boundary.csv", result.boundary)
    return result


def _failed(report, exc, code) -> PipelineResult:
    report["status"] = "error"
    report["error"] = _error_block(exc, code)
    log.error("%s: %s", type(exc).__name__, exc)
    return PipelineResult(code, report)


# ------------------------------------------------------ non-uniqueness demo

def nonuniqueness_demo(config, out_dir=None) -> dict:
    """Solve a Hilbert problem with and without the singular part and compare.

    The two runs share every datum except the ladder term; the interior
    difference shows the solutions differ while both keep the boundary
    residual small at probes away from the ladder steps.
    """
    cfg = config if isinstance(config, RunConfig) else RunConfig.from_dict(config)
    if cfg.kind not in ("hilbert", "dirichlet"):
        raise ConfigError("the non-uniqueness demo needs a hilbert or dirichlet problem")
    runs = {}
    for enabled in (False, True):
        c = cfg.with_updates({"hilbert": {"singular_enabled": enabled}})
        runs[enabled] = solve_case(build_case(c))
    measures = sorted({mu for s in runs.values() for mu in _ladder_measures(s)}, key=repr)
    suites = {k: boundary_suite(s, measures) for k, s in runs.items()}
    r = cfg["verify.residual_radius"]
    inside = runs[False].case.grid.inside(r)
    diff = float(np.max(np.abs(runs[True].values - runs[False].values)[inside]))
    tol = cfg["verify.boundary_tol"]
    med0 = suites[False]["median_residual_off_ladder"]
    med1 = suites[True]["median_residual_off_ladder"]
    report = {
        "config": cfg.to_dict(),
        "interior_radius": r,
        "interior_sup_difference": diff,
        "median_residual_without_singular": med0,
        "median_residual_with_singular": med1,
        "probes": suites[True]["probes"],
        "probes_off_ladder": int(np.sum(~suites[True]["near_mask"] & ~suites[True]["excluded_mask"])),
        "ladders": [repr(mu) for mu in measures],
        "expectations": {"difference_above": 1e-3, "median_below": tol},
    }
    report["passed"] = bool(diff > 1e-3 and med0 < tol and med1 < tol)
    if out_dir is not None:
        _write(out_dir, "nonuniqueness.json", dump_json(report))
    return report
