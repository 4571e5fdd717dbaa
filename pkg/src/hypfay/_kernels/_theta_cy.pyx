# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled theta lattice sum: value, gradient and Hessian in one pass."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, sin

cnp.import_array()


def theta_sum_raw(m_in, tau_in, w_in, int order=0):
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] m = np.ascontiguousarray(m_in, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] tau = np.ascontiguousarray(tau_in, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] w = np.ascontiguousarray(w_in, dtype=np.complex128)
    cdef Py_ssize_t n_pts = m.shape[0]
    cdef Py_ssize_t g = m.shape[1]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] expo = np.empty(n_pts, dtype=np.complex128)
    cdef Py_ssize_t i, j, k
    cdef double complex q, l, t, term, cj
    cdef double complex IPI = 1j*3.14159265358979323846
    cdef double shift = -1e308
    cdef double er, ei, mag

    for i in range(n_pts):
        q = 0
        l = 0
        for j in range(g):
            t = 0
            for k in range(g):
                t = t + tau[j, k]*m[i, k]
            q = q + m[i, j]*t
            l = l + m[i, j]*w[j]
        expo[i] = IPI*q + 2*IPI*l
        if expo[i].real > shift:
            shift = expo[i].real

    cdef double complex val = 0
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] grad = np.zeros(g, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] hess = np.zeros((g, g), dtype=np.complex128)

    for i in range(n_pts):
        er = expo[i].real - shift
        ei = expo[i].imag
        mag = exp(er)
        term = mag*cos(ei) + 1j*mag*sin(ei)
        val = val + term
        if order >= 1:
            for j in range(g):
                cj = 2*IPI*m[i, j]
                grad[j] = grad[j] + cj*term
                if order >= 2:
                    for k in range(g):
                        hess[j, k] = hess[j, k] + cj*(2*IPI*m[i, k])*term

    cdef double complex escale = np.exp(shift + 0j)
    val = val*escale
    if order >= 1:
        for j in range(g):
            grad[j] = grad[j]*escale
            if order >= 2:
                for k in range(g):
                    hess[j, k] = hess[j, k]*escale
    return val, (np.asarray(grad) if order >= 1 else None), (np.asarray(hess) if order >= 2 else None)
