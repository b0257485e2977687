"""Named application presets.

The semilinear presets share one coefficient: a C^3 bump of height 4 and
radius 0.18 centred inside the support disk of radius 0.5.  Poincare
presets use the direction field "inner normal rotated by 0.5 rad".  The
Neumann presets use ``phi = 2 sin(theta)`` and a smaller bump (radius
0.12 at ``0.35 e^{0.65 i}``) placed where the solution keeps one sign, so
the clamped and Hoelder nonlinearities stay smooth on the support.  ``corollary7`` and ``corollary10`` solve
``Delta U = H e^U`` through ``V = -U`` (see ``nonlinearity.substitution``).
"""
from __future__ import annotations

from .config import ConfigError, RunConfig

_POISSON = {"coefficient": {"spec": "bump:4", "support_radius": 0.5},
            "data": {"nu": "rotnormal:0.5", "phi": "coskt:1"}}
_NEUMANN_BUMP = "bump:4:0.28:0.21:0.12"

PRESETS = {
    "corollary5": {
        "problem": {"kind": "poincare"}, **_POISSON,
        "nonlinearity": {"kind": "power_clamped", "beta": 0.5},
    },
    "corollary6": {
        "problem": {"kind": "poincare"}, **_POISSON,
        "nonlinearity": {"kind": "signed_power", "beta": 0.5},
    },
    "corollary7": {
        "problem": {"kind": "poincare"},
        "coefficient": {"spec": "bump:4", "support_radius": 0.5},
        "data": {"nu": "rotnormal:0.5", "phi": "coskt:1:-1"},
        "nonlinearity": {"kind": "exp_clamped", "substitution": "negate"},
    },
    "corollary8": {
        "problem": {"kind": "neumann"},
        "coefficient": {"spec": _NEUMANN_BUMP, "support_radius": 0.5},
        "data": {"phi": "sinkt:1:2"},
        "nonlinearity": {"kind": "power_clamped", "beta": 0.5},
    },
    "corollary9": {
        "problem": {"kind": "neumann"},
        "coefficient": {"spec": _NEUMANN_BUMP, "support_radius": 0.5},
        "data": {"phi": "sinkt:1:2"},
        "nonlinearity": {"kind": "signed_power", "beta": 0.5},
    },
    "corollary10": {
        "problem": {"kind": "neumann"},
        "coefficient": {"spec": _NEUMANN_BUMP, "support_radius": 0.5},
        "data": {"phi": "sinkt:1:-2"},
        "nonlinearity": {"kind": "exp_clamped", "substitution": "negate"},
    },
    "theoremD-linear": {
        "problem": {"kind": "hilbert"},
        "data": {"lambda": "phasestep:0:1.5", "phi": "step:0:1"},
        "coefficient": {"spec": "zero"},
        "nonlinearity": {"kind": "none"},
    },
    "luzin-dirichlet": {
        "problem": {"kind": "dirichlet"},
        "data": {"phi": "step:0:1"},
        "coefficient": {"spec": "zero"},
        "nonlinearity": {"kind": "none"},
    },
}

DESCRIPTIONS = {
    "corollary5": "Poincare problem, Delta U = H max(U,0)^0.5, rotated normal",
    "corollary6": "Poincare problem, Delta U = H |U|^-0.5 U, rotated normal",
    "corollary7": "Poincare problem, Delta U = H e^U via V = -U",
    "corollary8": "Neumann problem, Delta U = H max(U,0)^0.5",
    "corollary9": "Neumann problem, Delta U = H |U|^-0.5 U",
    "corollary10": "Neumann problem, Delta U = H e^U via V = -U",
    "theoremD-linear": "Hilbert problem with g = 0, lambda with a phase step, step data",
    "luzin-dirichlet": "Dirichlet problem for step data",
}


def preset(name: str) -> RunConfig:
    """Complete :class:`RunConfig` for a named preset."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}")
    return RunConfig.from_dict(PRESETS[name])


def preset_names() -> list:
    return list(PRESETS)
