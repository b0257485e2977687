"""Backend selection for the quadrature sums.

The compiled extension is used when it imports; setting the environment
variable ``VEKUABVP_PURE_PYTHON=1`` forces the numpy fallback.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("VEKUABVP_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"


def _c(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def _r(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _per_target(a, n):
    if a is None:
        return np.zeros(n, dtype=np.complex128)
    return _c(np.broadcast_to(a, (n,)))


def cauchy_sum(targets, sources, values, weights, subtract, grad_w=None, grad_wbar=None,
               eps=1e-14, impl=None):
    """``sum_k w_k [g_k - s - a e_k - b conj(e_k)] / (z - w_k)``, ``e_k = w_k - z``."""
    impl = impl or _impl
    n = np.shape(targets)[0]
    return impl.cauchy_sum(_c(targets), _c(sources), _c(values), _r(weights), _per_target(subtract, n),
                           _per_target(grad_w, n), _per_target(grad_wbar, n), float(eps))


def cauchy2_sum(targets, sources, values, weights, impl=None):
    """``sum_k w_k g_k / (z - w_k)^2``."""
    impl = impl or _impl
    return impl.cauchy2_sum(_c(targets), _c(sources), _c(values), _r(weights))


def log_sum(targets, sources, values, weights, subtract, grad_w=None, eps=1e-14, impl=None):
    """``sum_k w_k [G_k - s - 2 Re(a e_k)] ln|z - w_k|``, ``e_k = w_k - z``."""
    impl = impl or _impl
    n = np.shape(targets)[0]
    return impl.log_sum(_c(targets), _c(sources), _r(values), _r(weights),
                        _r(np.broadcast_to(subtract, (n,))), _per_target(grad_w, n), float(eps))


def available_backends():
    """Map backend name to implementation module for benchmarking."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        out["cython"] = _compiled
    return out
