# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; must stay bit-identical to ``amrpe._fallback``."""

import numpy as np

from libc.math cimport sqrt


def magnetic_laplacian(const long long[:] src, const long long[:] dst, Py_ssize_t n,
                       double cos_t, double sin_t):
    cdef unsigned char[:, :] A = np.zeros((n, n), dtype=np.uint8)
    out = np.zeros((n, n), dtype=np.complex128)
    cdef double[:, :, :] L = out.view(np.float64).reshape(n, n, 2)
    cdef Py_ssize_t e, u, v
    cdef double deg
    cdef int skew
    for e in range(src.shape[0]):
        A[src[e], dst[e]] = 1
    for u in range(n):
        deg = 0.0
        for v in range(n):
            if A[u, v] or A[v, u]:
                deg += 1.0
        L[u, u, 0] = deg - (1.0 if A[u, u] else 0.0)
        for v in range(u + 1, n):
            if not (A[u, v] or A[v, u]):
                continue
            skew = <int>A[u, v] - <int>A[v, u]
            L[u, v, 0] = -cos_t if skew != 0 else -1.0
            L[u, v, 1] = -sin_t * skew
            L[v, u, 0] = L[u, v, 0]
            L[v, u, 1] = -L[u, v, 1]
    return out


def gauge_fix(double complex[:, :] V, double rtol):
    """Rotate each column so its largest-magnitude entry is real and positive.

    Entries within ``rtol`` (relative, on squared magnitude) of the maximum
    count as ties; the lowest row index wins.
    """
    cdef Py_ssize_t n = V.shape[0], k = V.shape[1], i, j, a
    cdef double best, m2, r, pr, pi, xr, xi
    out = np.empty((n, k), dtype=np.complex128)
    cdef double[:, :, :] O = out.view(np.float64).reshape(n, k, 2)
    for j in range(k):
        best = 0.0
        for i in range(n):
            m2 = V[i, j].real * V[i, j].real + V[i, j].imag * V[i, j].imag
            if m2 > best:
                best = m2
        a = 0
        for i in range(n):
            m2 = V[i, j].real * V[i, j].real + V[i, j].imag * V[i, j].imag
            if m2 >= best * (1.0 - rtol):
                a = i
                break
        m2 = V[a, j].real * V[a, j].real + V[a, j].imag * V[a, j].imag
        r = sqrt(m2)
        if r == 0.0:
            pr = 1.0
            pi = 0.0
        else:
            pr = V[a, j].real / r
            pi = -V[a, j].imag / r
        for i in range(n):
            xr = V[i, j].real
            xi = V[i, j].imag
            O[i, j, 0] = xr * pr - xi * pi
            O[i, j, 1] = xr * pi + xi * pr
        O[a, j, 0] = r
        O[a, j, 1] = 0.0
    return out
