"""Run configuration: a nested key-value tree read from YAML.

Every key has a default; unknown keys and out-of-range values raise
:class:`ConfigError`.  See ``SCHEMA`` for the full list.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
import yaml

from ..boundarydata import parse_closure, signal_function, unimodular_function
from ..diskgrid import GridError
from ..domains import ChartError, parse_chart
from .coefficients import CoefficientError, parse_coefficient
from ..semilinear import PRESET_KINDS, Nonlinearity, NonlinearityError, SolverConfig

PROBLEM_KINDS = ("hilbert", "poincare", "neumann", "dirichlet")
NONLINEARITY_KINDS = ("none",) + PRESET_KINDS
SUBSTITUTIONS = ("none", "negate")

SCHEMA = {
    "problem": {"kind": "hilbert"},
    "grid": {"n_r": 128, "n_theta": 256, "r_max": 0.95, "support_radius": 0.6},
    "data": {"lambda": "one", "nu": "rotnormal:0.5", "phi": "coskt:1", "closure": "cantor",
             "param": "arclength"},
    "coefficient": {"spec": "zero", "support_radius": 0.5},
    "nonlinearity": {"kind": "none", "beta": 0.5, "table": None, "substitution": "none"},
    "solver": {"p": 4.0, "damping": 0.5, "tol": 1e-8, "tau_steps": [0.25, 0.5, 0.75, 1.0],
               "max_iter": 200},
    "chart": {"spec": "identity"},
    "hilbert": {"singular_depth": 12, "singular_enabled": False, "singular_amplitude": 1.0},
    "verify": {"probes": 64, "aperture": 30.0, "rays": 8,
               "distances": [float(d) for d in np.geomspace(1e-1, 1e-4, 7)],
               "normal_reference": 1e-5, "residual_radius": 0.8, "boundary_tol": 5e-3,
               "pde_tol": 1e-3, "fixed_point_tol": 1e-6, "discontinuity_margin": 0.02,
               "ladder_margin": 1e-2},
}


class ConfigError(ValueError):
    """Invalid configuration (CLI exit code 2)."""


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        key = f"{path}{k}"
        if "." in str(k):
            head, _, tail = str(k).partition(".")
            out = _merge(out, {head: {tail: v}}, path)
            continue
        if k not in base:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"config key {key!r} must be a mapping")
            out[k] = _merge(base[k], v, key + ".")
        else:
            out[k] = v
    return out


def _num(tree, section, key, kind=float, lo=None, hi=None, lo_open=False, hi_open=False):
    v = tree[section][key]
    name = f"{section}.{key}"
    try:
        if kind is int:
            if isinstance(v, bool) or float(v) != int(v):
                raise ValueError
            v = int(v)
        else:
            v = float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {v!r}") from None
    bad = ((lo is not None and (v < lo or (lo_open and v == lo)))
           or (hi is not None and (v > hi or (hi_open and v == hi))))
    if bad or not np.isfinite(v):
        raise ConfigError(f"parameter out of range: {name} = {v!r}")
    tree[section][key] = v
    return v


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration tree.

    Attributes
    ----------
    tree : dict
        Nested mapping with every key of ``SCHEMA`` filled in.
    """

    tree: dict

    def __getitem__(self, dotted: str) -> Any:
        node = self.tree
        for part in dotted.split("."):
            node = node[part]
        return node

    @property
    def kind(self) -> str:
        return self.tree["problem"]["kind"]

    @property
    def solver_mode(self) -> str:
        return "vekua" if self.kind in ("hilbert", "dirichlet") else "poisson"

    def solver_config(self) -> SolverConfig:
        s = self.tree["solver"]
        return SolverConfig(p=s["p"], damping=s["damping"], tol=s["tol"],
                            tau_steps=tuple(s["tau_steps"]), max_iter=s["max_iter"])

    def nonlinearity(self) -> Optional[Nonlinearity]:
        n = self.tree["nonlinearity"]
        if n["kind"] == "none":
            return None
        table = None if n["table"] is None else tuple(tuple(map(float, row)) for row in n["table"])
        return Nonlinearity(n["kind"], n["beta"], table)

    def with_updates(self, updates: dict) -> "RunConfig":
        return RunConfig.from_dict(_merge(self.tree, updates))

    def to_dict(self) -> dict:
        return copy.deepcopy(self.tree)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.tree, sort_keys=True, default_flow_style=False)

    @classmethod
    def from_dict(cls, data: Optional[dict]) -> "RunConfig":
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping")
        tree = _merge(SCHEMA, data)
        validate(tree)
        return cls(tree)


def validate(tree: dict) -> None:
    """Check ranges and references in place (numbers are normalized)."""
    kind = tree["problem"]["kind"]
    if kind not in PROBLEM_KINDS:
        raise ConfigError(f"unknown problem.kind {kind!r}; expected one of {PROBLEM_KINDS}")
    n_r = _num(tree, "grid", "n_r", int, lo=8, hi=4096)
    n_t = _num(tree, "grid", "n_theta", int, lo=8, hi=16384)
    if n_t % 2:
        raise ConfigError("parameter out of range: grid.n_theta must be even")
    r_max = _num(tree, "grid", "r_max", lo=0.0, hi=1.0, lo_open=True, hi_open=True)
    s = _num(tree, "grid", "support_radius", lo=0.0, hi=r_max, lo_open=True)
    _num(tree, "coefficient", "support_radius", lo=0.0, hi=s, lo_open=True)
    del n_r
    del n_t

    data = tree["data"]
    try:
        signal_function(data["phi"])
        if kind == "hilbert":
            unimodular_function(data["lambda"])
        if kind == "poincare":
            unimodular_function(data["nu"])
        parse_closure(data["closure"])
    except (GridError, ValueError) as exc:
        raise ConfigError(f"bad boundary data: {exc}") from None
    if data["param"] not in ("arclength", "point"):
        raise ConfigError("data.param must be 'arclength' or 'point'")

    try:
        func, _, extent = parse_coefficient(tree["coefficient"]["spec"])
    except CoefficientError as exc:
        raise ConfigError(str(exc)) from None
    if extent is not None and tree["chart"]["spec"] in ("identity", None) \
            and extent > tree["coefficient"]["support_radius"] + 1e-12:
        raise ConfigError("parameter out of range: coefficient extends beyond coefficient.support_radius")

    nl = tree["nonlinearity"]
    if nl["kind"] not in NONLINEARITY_KINDS:
        raise ConfigError(f"unknown nonlinearity.kind {nl['kind']!r}")
    _num(tree, "nonlinearity", "beta")
    if nl["substitution"] not in SUBSTITUTIONS:
        raise ConfigError(f"unknown nonlinearity.substitution {nl['substitution']!r}")
    vekua = kind in ("hilbert", "dirichlet")
    if nl["substitution"] == "negate" and vekua:
        raise ConfigError("the sign substitution applies to poincare and neumann problems only")
    if nl["kind"] != "none":
        try:
            nonlin = RunConfig(tree).nonlinearity()
        except (NonlinearityError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad nonlinearity: {exc}") from None
        if vekua and nonlin.domain == "real":
            raise ConfigError(f"nonlinearity {nl['kind']} is real-valued; {kind} problems need a complex one")

    for key, kind_ in (("p", float), ("damping", float), ("tol", float), ("max_iter", int)):
        _num(tree, "solver", key, kind_)
    try:
        tree["solver"]["tau_steps"] = [float(t) for t in tree["solver"]["tau_steps"]]
        RunConfig(tree).solver_config()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"parameter out of range: solver ({exc})") from None

    try:
        parse_chart(tree["chart"]["spec"], r_max).check()
    except (ChartError, GridError, ValueError) as exc:
        raise ConfigError(f"bad chart: {exc}") from None

    _num(tree, "hilbert", "singular_depth", int, lo=1, hi=30)
    _num(tree, "hilbert", "singular_amplitude")
    if not isinstance(tree["hilbert"]["singular_enabled"], bool):
        raise ConfigError("hilbert.singular_enabled must be true or false")

    v = tree["verify"]
    _num(tree, "verify", "probes", int, lo=1, hi=4096)
    _num(tree, "verify", "aperture", lo=0.0, hi=90.0, hi_open=True)
    _num(tree, "verify", "rays", int, lo=1, hi=256)
    try:
        v["distances"] = [float(d) for d in v["distances"]]
    except (TypeError, ValueError):
        raise ConfigError("verify.distances must be a list of numbers") from None
    d = v["distances"]
    if len(d) < 2 or any(x <= 0 or x >= 1 for x in d) or any(b >= a for a, b in zip(d, d[1:])):
        raise ConfigError("parameter out of range: verify.distances must decrease strictly inside (0, 1)")
    _num(tree, "verify", "normal_reference", lo=0.0, hi=d[-1], lo_open=True, hi_open=True)
    _num(tree, "verify", "residual_radius", lo=0.0, hi=r_max, lo_open=True)
    for key in ("boundary_tol", "pde_tol", "fixed_point_tol"):
        _num(tree, "verify", key, lo=0.0, lo_open=True)
    for key in ("discontinuity_margin", "ladder_margin"):
        _num(tree, "verify", key, lo=0.0)


def load_config(path) -> RunConfig:
    """Read a YAML config file."""
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from None
    return RunConfig.from_dict(data)
