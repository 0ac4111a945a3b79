# cython: language_level=3
"""Compiled hot kernels.

Same signatures and semantics as ``_pykernels``; the fused loops avoid the
temporaries numpy allocates for each arithmetic stage.
"""
import numpy as np

cimport cython
from libc.math cimport cos, exp, log, sqrt, M_PI

ctypedef double f64


@cython.boundscheck(False)
@cython.wraparound(False)
def s1(const f64[:, ::1] x, double c):
    cdef Py_ssize_t m, n = x.shape[0]
    cdef f64[::1] out = np.empty(n)
    cdef double x1, x2, q, first, second
    cdef double half_c2 = 0.5 * c * c
    with nogil:
        for m in range(n):
            x1 = x[m, 0]
            x2 = x[m, 1]
            q = x1 / 5.0
            q = q * q
            first = c - 1.0 - x2 + exp(-x1 * x1 / 10.0) + q * q
            second = half_c2 - x1 * x2
            out[m] = first if first < second else second
    return np.asarray(out)


@cython.boundscheck(False)
@cython.wraparound(False)
def s2(const f64[:, ::1] x, double a, double b):
    cdef Py_ssize_t m, n = x.shape[0]
    cdef f64[::1] out = np.empty(n)
    cdef double x1, x2, d, s, base, v, w
    cdef double inv_sqrt2 = 1.0 / sqrt(2.0)
    cdef double offset = b * inv_sqrt2 + 1.0
    with nogil:
        for m in range(n):
            x1 = x[m, 0]
            x2 = x[m, 1]
            d = x1 - x2
            s = (x1 + x2) * inv_sqrt2
            base = a + d * d / 10.0
            v = base - s
            w = base + s
            if w < v:
                v = w
            w = d + offset
            if w < v:
                v = w
            w = -d + offset
            if w < v:
                v = w
            out[m] = v
    return np.asarray(out)


@cython.boundscheck(False)
@cython.wraparound(False)
def s3(const f64[:, ::1] x):
    cdef Py_ssize_t m, n = x.shape[0]
    cdef f64[::1] out = np.empty(n)
    cdef double x1, x2
    cdef double two_pi = 2.0 * M_PI
    with nogil:
        for m in range(n):
            x1 = x[m, 0]
            x2 = x[m, 1]
            out[m] = 10.0 - (x1 * x1 - 5.0 * cos(two_pi * x1)) - (x2 * x2 - 5.0 * cos(two_pi * x2))
    return np.asarray(out)


@cython.boundscheck(False)
@cython.wraparound(False)
def s4(const f64[:, ::1] x, double gamma):
    cdef Py_ssize_t m, i, n = x.shape[0], d = x.shape[1]
    cdef f64[::1] out = np.empty(n)
    cdef double acc
    cdef double scale = 1.0 / sqrt(<double>d)
    with nogil:
        for m in range(n):
            acc = 0.0
            for i in range(d):
                acc = acc + x[m, i]
            out[m] = gamma - scale * acc
    return np.asarray(out)


@cython.boundscheck(False)
@cython.wraparound(False)
def component_logpdf(const f64[:, ::1] x, const f64[:, ::1] means, const f64[:, :, ::1] chols):
    """(M, N) matrix of Gaussian log-densities from lower Cholesky factors."""
    cdef Py_ssize_t n_samples = x.shape[0], d = x.shape[1], n_comp = means.shape[0]
    cdef Py_ssize_t m, k, i, j
    cdef f64[:, ::1] out = np.empty((n_samples, n_comp))
    cdef f64[::1] z = np.empty(d)
    cdef f64[::1] log_norm = np.empty(n_comp)
    cdef double acc, quad
    for k in range(n_comp):
        acc = 0.0
        for i in range(d):
            acc = acc + log(chols[k, i, i])
        log_norm[k] = -0.5 * d * log(2.0 * M_PI) - acc
    with nogil:
        for m in range(n_samples):
            for k in range(n_comp):
                quad = 0.0
                for i in range(d):
                    acc = x[m, i] - means[k, i]
                    for j in range(i):
                        acc = acc - chols[k, i, j] * z[j]
                    z[i] = acc / chols[k, i, i]
                    quad = quad + z[i] * z[i]
                out[m, k] = log_norm[k] - 0.5 * quad
    return np.asarray(out)
