# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled one-sided (Hestenes) Jacobi sweeps.

Columns are stored as rows of a C-contiguous array so every dot product and
rotation touches contiguous memory.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, hypot

cnp.import_array()


cdef inline double _dot(const double* x, const double* y, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(n):
        acc += x[i] * y[i]
    return acc


cdef inline void _rotate(double* x, double* y, Py_ssize_t n, double c, double s) noexcept nogil:
    cdef Py_ssize_t i
    cdef double xi, yi
    for i in range(n):
        xi = x[i]
        yi = y[i]
        x[i] = c * xi - s * yi
        y[i] = s * xi + c * yi


def one_sided_jacobi(cnp.ndarray[cnp.float64_t, ndim=2] cols, double tol, int max_sweeps):
    """Orthogonalize the rows of ``cols`` in place by plane rotations.

    Returns ``(cols, vt, sweeps)`` where ``vt`` accumulates the rotations
    (row ``k`` of ``vt`` is the k-th right singular vector) and ``sweeps``
    is the number of sweeps run, or -1 if ``max_sweeps`` was exhausted.
    """
    cols = np.array(cols, dtype=np.float64, order="C")
    cdef Py_ssize_t r = cols.shape[0]
    cdef Py_ssize_t m = cols.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] vt = np.eye(r, dtype=np.float64)
    cdef double* g = <double*> cols.data
    cdef double* v = <double*> vt.data
    cdef Py_ssize_t p, q
    cdef double alpha, beta, gamma, zeta, t, c, s
    cdef int sweep
    cdef int done = -1
    cdef long rotated

    with nogil:
        for sweep in range(max_sweeps):
            rotated = 0
            for p in range(r - 1):
                for q in range(p + 1, r):
                    alpha = _dot(g + p * m, g + p * m, m)
                    beta = _dot(g + q * m, g + q * m, m)
                    if alpha == 0.0 or beta == 0.0:
                        continue
                    gamma = _dot(g + p * m, g + q * m, m)
                    if fabs(gamma) <= tol * sqrt(alpha) * sqrt(beta):
                        continue
                    rotated += 1
                    zeta = (beta - alpha) / (2.0 * gamma)
                    t = 1.0 / (fabs(zeta) + hypot(1.0, zeta))
                    if zeta < 0.0:
                        t = -t
                    c = 1.0 / sqrt(1.0 + t * t)
                    s = c * t
                    _rotate(g + p * m, g + q * m, m, c, s)
                    _rotate(v + p * r, v + q * r, r, c, s)
            if rotated == 0:
                done = sweep + 1
                break
    return cols, vt, done
