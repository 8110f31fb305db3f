# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Signatures mirror :mod:`opencavity._fallback`."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, M_PI

cnp.import_array()


def stack_response(const double[::1] index, const double[::1] thickness, double ambient,
                   double substrate, const double[::1] wavelengths):
    """Amplitude reflection and transmission of a layer stack at each wavelength.

    exp(-i omega t) convention, normal incidence, real indices.
    """
    cdef Py_ssize_t nw = wavelengths.shape[0]
    cdef Py_ssize_t nl = index.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] r = np.empty(nw, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] t = np.empty(nw, dtype=np.complex128)
    cdef Py_ssize_t i, j
    # real indices keep the diagonal real and the off-diagonal imaginary:
    # M = [[a, i p], [i q, d]] with a, p, q, d real
    cdef double a, p, q, d, a2, p2, q2, d2
    cdef double delta, cd, sd, n, k0
    cdef double complex b, c, den
    for i in range(nw):
        a = 1.0
        p = 0.0
        q = 0.0
        d = 1.0
        k0 = 2.0 * M_PI / wavelengths[i]
        for j in range(nl):
            n = index[j]
            delta = k0 * n * thickness[j]
            cd = cos(delta)
            sd = sin(delta)
            a2 = a * cd + p * n * sd
            p2 = p * cd - a * sd / n
            q2 = q * cd - d * n * sd
            d2 = q * sd / n + d * cd
            a = a2
            p = p2
            q = q2
            d = d2
        b = a + 1j * p * substrate
        c = 1j * q + d * substrate
        den = ambient * b + c
        r[i] = (ambient * b - c) / den
        t[i] = 2.0 * ambient / den
    return r, t


def lorentz_overlap(const double[::1] wavelengths, const double[::1] density,
                    const double[::1] centers, const double[::1] qfactors):
    """Trapezoidal integral of density / (1 + 4 Q^2 (lam/center - 1)^2) per center."""
    cdef Py_ssize_t nw = wavelengths.shape[0]
    cdef Py_ssize_t nc = centers.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(nc, dtype=np.float64)
    cdef Py_ssize_t i, k
    cdef double lc, q4, x, f_prev, f_cur, acc
    for k in range(nc):
        lc = centers[k]
        q4 = 4.0 * qfactors[k] * qfactors[k]
        x = wavelengths[0] / lc - 1.0
        f_prev = density[0] / (1.0 + q4 * x * x)
        acc = 0.0
        for i in range(1, nw):
            x = wavelengths[i] / lc - 1.0
            f_cur = density[i] / (1.0 + q4 * x * x)
            acc += 0.5 * (f_prev + f_cur) * (wavelengths[i] - wavelengths[i - 1])
            f_prev = f_cur
        out[k] = acc
    return out
