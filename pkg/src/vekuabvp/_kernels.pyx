# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled direct-quadrature sums over a source cloud.

Each routine evaluates one target at a time against every source node.
Sources are passed as separate real and imaginary parts so the inner
loops stay in plain double arithmetic.  The numpy twin lives in
``_kernels_py``; both must agree to rounding.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log

cnp.import_array()


def cauchy_sum(const double complex[::1] targets,
               const double complex[::1] sources,
               const double complex[::1] values,
               const double[::1] weights,
               const double complex[::1] subtract,
               const double complex[::1] grad_w,
               const double complex[::1] grad_wbar,
               double eps):
    """sum_k w_k [g_k - s - a e_k - b conj(e_k)] / (z - w_k) with e_k = w_k - z.

    ``s, a, b`` are per-target; pairs closer than ``eps`` are skipped.
    """
    cdef Py_ssize_t nt = targets.shape[0]
    cdef Py_ssize_t ns = sources.shape[0]
    cdef Py_ssize_t t, k
    cdef double zr, zi, sr, si, ar, ai, br, bi
    cdef double dr, di, den, inv, nr, ni, qr, qi, accr, acci, eps2 = eps * eps
    cdef double[::1] xr = np.ascontiguousarray(np.real(np.asarray(sources)))
    cdef double[::1] xi = np.ascontiguousarray(np.imag(np.asarray(sources)))
    cdef double[::1] gr = np.ascontiguousarray(np.real(np.asarray(values)))
    cdef double[::1] gi = np.ascontiguousarray(np.imag(np.asarray(values)))
    out = np.empty(nt, dtype=np.complex128)
    cdef double complex[::1] res = out
    for t in range(nt):
        zr = targets[t].real
        zi = targets[t].imag
        sr = subtract[t].real
        si = subtract[t].imag
        ar = grad_w[t].real
        ai = grad_w[t].imag
        br = grad_wbar[t].real
        bi = grad_wbar[t].imag
        accr = 0.0
        acci = 0.0
        for k in range(ns):
            dr = zr - xr[k]
            di = zi - xi[k]
            den = dr * dr + di * di
            if den < eps2:
                continue
            # numerator g - s + a d + b conj(d)
            nr = gr[k] - sr + (ar * dr - ai * di) + (br * dr + bi * di)
            ni = gi[k] - si + (ar * di + ai * dr) + (bi * dr - br * di)
            inv = weights[k] / den
            # numerator * conj(d) / |d|^2
            qr = (nr * dr + ni * di) * inv
            qi = (ni * dr - nr * di) * inv
            accr = accr + qr
            acci = acci + qi
        res[t] = accr + 1j * acci
    return out


def cauchy2_sum(const double complex[::1] targets,
                const double complex[::1] sources,
                const double complex[::1] values,
                const double[::1] weights):
    """sum_k w_k g_k / (z - w_k)^2; targets must stay off the sources."""
    cdef Py_ssize_t nt = targets.shape[0]
    cdef Py_ssize_t ns = sources.shape[0]
    cdef Py_ssize_t t, k
    cdef double zr, zi, dr, di, den, pr, pi_, wr, wi, accr, acci
    cdef double[::1] xr = np.ascontiguousarray(np.real(np.asarray(sources)))
    cdef double[::1] xi = np.ascontiguousarray(np.imag(np.asarray(sources)))
    cdef double[::1] gr = np.ascontiguousarray(np.real(np.asarray(values)) * np.asarray(weights))
    cdef double[::1] gi = np.ascontiguousarray(np.imag(np.asarray(values)) * np.asarray(weights))
    out = np.empty(nt, dtype=np.complex128)
    cdef double complex[::1] res = out
    for t in range(nt):
        zr = targets[t].real
        zi = targets[t].imag
        accr = 0.0
        acci = 0.0
        for k in range(ns):
            dr = zr - xr[k]
            di = zi - xi[k]
            den = dr * dr + di * di
            den = 1.0 / (den * den)
            # 1/d^2 = conj(d)^2 / |d|^4
            pr = (dr * dr - di * di) * den
            pi_ = -2.0 * dr * di * den
            wr = gr[k]
            wi = gi[k]
            accr = accr + wr * pr - wi * pi_
            acci = acci + wr * pi_ + wi * pr
        res[t] = accr + 1j * acci
    return out


def log_sum(const double complex[::1] targets,
            const double complex[::1] sources,
            const double[::1] values,
            const double[::1] weights,
            const double[::1] subtract,
            const double complex[::1] grad_w,
            double eps):
    """sum_k w_k [G_k - s - 2 Re(a e_k)] ln|z - w_k| with e_k = w_k - z."""
    cdef Py_ssize_t nt = targets.shape[0]
    cdef Py_ssize_t ns = sources.shape[0]
    cdef Py_ssize_t t, k
    cdef double zr, zi, s, ar, ai, dr, di, den, acc, eps2 = eps * eps
    cdef double[::1] xr = np.ascontiguousarray(np.real(np.asarray(sources)))
    cdef double[::1] xi = np.ascontiguousarray(np.imag(np.asarray(sources)))
    out = np.empty(nt, dtype=np.float64)
    cdef double[::1] res = out
    for t in range(nt):
        zr = targets[t].real
        zi = targets[t].imag
        s = subtract[t]
        ar = grad_w[t].real
        ai = grad_w[t].imag
        acc = 0.0
        for k in range(ns):
            dr = zr - xr[k]
            di = zi - xi[k]
            den = dr * dr + di * di
            if den < eps2:
                continue
            acc = acc + weights[k] * (values[k] - s + 2.0 * (ar * dr - ai * di)) * 0.5 * log(den)
        res[t] = acc
    return out
