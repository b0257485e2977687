"""Coefficient presets ``h`` / ``H`` as callables on domain points.

Grammar::

    zero
    const:<c>                          c on the support disk
    bump:<amp>[:<cx>:<cy>:<r>]         amp * cos(pi s / 2)**4, s = |z - c| / r
    cbump:<re>:<im>[:<cx>:<cy>:<r>]    complex amplitude

The bump is C^3 with support in the closed disk of radius ``r`` around
``c``; the default centre is ``0.3`` and the default radius ``0.18``.
"""
from __future__ import annotations

import numpy as np

BUMP_CENTER = 0.3 + 0.0j
BUMP_RADIUS = 0.18


class CoefficientError(ValueError):
    pass


def cos4_bump(z, center: complex = BUMP_CENTER, radius: float = BUMP_RADIUS) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    s = np.abs(z - center) / radius
    out = np.zeros(z.shape)
    m = s < 1.0
    out[m] = np.cos(0.5 * np.pi * s[m]) ** 4
    return out


def parse_coefficient(spec: str):
    """Return ``(func, is_complex, extent)`` for a coefficient spec.

    ``extent`` is the radius around the origin outside which ``func``
    vanishes (``None`` for ``const``, which is cut at the support radius).
    """
    s = str(spec).strip()
    head, _, rest = s.partition(":")
    args = rest.split(":") if rest else []
    try:
        vals = [float(a) for a in args]
    except ValueError:
        raise CoefficientError(f"bad coefficient spec {s!r}") from None
    if head == "zero" and not args:
        return (lambda z: np.zeros(np.shape(z))), False, 0.0
    if head == "const" and len(vals) == 1:
        c = vals[0]
        return (lambda z: np.full(np.shape(z), c)), False, None
    if head in ("bump", "cbump"):
        n_amp = 1 if head == "bump" else 2
        if len(vals) not in (n_amp, n_amp + 3):
            raise CoefficientError(f"bad coefficient spec {s!r}")
        amp = vals[0] if head == "bump" else complex(vals[0], vals[1])
        if len(vals) == n_amp:
            c, r = BUMP_CENTER, BUMP_RADIUS
        else:
            c, r = complex(vals[n_amp], vals[n_amp + 1]), vals[n_amp + 2]
        if not r > 0:
            raise CoefficientError("bump radius must be positive")
        return (lambda z: amp * cos4_bump(z, c, r)), head == "cbump", abs(c) + r
    raise CoefficientError(f"unknown coefficient spec {s!r}")
