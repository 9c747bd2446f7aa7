"""Pure numpy implementations of the compiled kernels.

Operation order mirrors ``_ext/_kernels.pyx`` so both paths produce
bit-identical arrays.
"""

import numpy as np


def magnetic_laplacian(src, dst, n, cos_t, sin_t):
    A = np.zeros((n, n), dtype=bool)
    A[src, dst] = True
    AS = A | A.T
    skew = A.astype(np.int8) - A.T.astype(np.int8)
    L = np.zeros((n, n), dtype=np.complex128)
    upper = np.triu(AS, k=1)
    iu, iv = np.nonzero(upper)
    s = skew[iu, iv].astype(np.float64)
    re = np.where(s != 0, -cos_t, -1.0)
    im = -sin_t * s
    L.real[iu, iv] = re
    L.imag[iu, iv] = im
    L.real[iv, iu] = re
    L.imag[iv, iu] = -im
    diag = np.arange(n)
    L.real[diag, diag] = AS.sum(axis=1).astype(np.float64) - A[diag, diag].astype(np.float64)
    return L


def gauge_fix(V, rtol):
    V = np.asarray(V, dtype=np.complex128)
    n, k = V.shape
    out = np.empty((n, k), dtype=np.complex128)
    re, im = V.real, V.imag
    m2 = re * re + im * im
    for j in range(k):
        best = m2[:, j].max() if n else 0.0
        a = int(np.argmax(m2[:, j] >= best * (1.0 - rtol)))
        r = np.sqrt(m2[a, j])
        if r == 0.0:
            pr, pi = 1.0, 0.0
        else:
            pr = re[a, j] / r
            pi = -im[a, j] / r
        out.real[:, j] = re[:, j] * pr - im[:, j] * pi
        out.imag[:, j] = re[:, j] * pi + im[:, j] * pr
        out[a, j] = r
    return out
