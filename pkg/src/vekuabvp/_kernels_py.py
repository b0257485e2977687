"""Pure-numpy direct-quadrature sums, the fallback for ``_kernels``.

Targets are processed in chunks so the dense target-by-source block stays
within a few tens of megabytes.
"""
import numpy as np

_CHUNK_ELEMS = 2_000_000


def _chunks(nt, ns):
    step = max(1, _CHUNK_ELEMS // max(ns, 1))
    for start in range(0, nt, step):
        yield slice(start, min(nt, start + step))


def cauchy_sum(targets, sources, values, weights, subtract, grad_w, grad_wbar, eps):
    out = np.empty(targets.shape[0], dtype=np.complex128)
    for sl in _chunks(targets.shape[0], sources.shape[0]):
        d = targets[sl, None] - sources[None, :]
        close = np.abs(d) < eps
        d[close] = 1.0
        num = values[None, :] - subtract[sl, None] + grad_w[sl, None] * d + grad_wbar[sl, None] * np.conj(d)
        num = weights[None, :] * num
        num[close] = 0.0
        out[sl] = np.sum(num / d, axis=1)
    return out


def cauchy2_sum(targets, sources, values, weights):
    out = np.empty(targets.shape[0], dtype=np.complex128)
    wg = weights * values
    for sl in _chunks(targets.shape[0], sources.shape[0]):
        d = targets[sl, None] - sources[None, :]
        out[sl] = np.sum(wg[None, :] / (d * d), axis=1)
    return out


def log_sum(targets, sources, values, weights, subtract, grad_w, eps):
    out = np.empty(targets.shape[0], dtype=np.float64)
    for sl in _chunks(targets.shape[0], sources.shape[0]):
        d = targets[sl, None] - sources[None, :]
        den = d.real ** 2 + d.imag ** 2
        close = den < eps * eps
        den[close] = 1.0
        num = values[None, :] - subtract[sl, None] + 2.0 * (grad_w[sl, None] * d).real
        num = weights[None, :] * num
        num[close] = 0.0
        out[sl] = np.sum(num * 0.5 * np.log(den), axis=1)
    return out
