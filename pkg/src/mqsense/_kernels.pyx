# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled structure-constant kernel.

Mirrors ``mqsense._kernels_py.chi_block`` exactly; the two are checked
against each other in the test suite.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


cdef inline double _norm(int ns, int m, int n, int h, const double[:, ::1] binom) noexcept nogil:
    cdef int a = (h + m - n) // 2
    cdef int b = (h - m + n) // 2
    cdef int c = (m + n - h) // 2
    return sqrt(binom[ns, a] * binom[ns - a, b] * binom[ns - a - b, c])


cdef inline int _hmax(int ns, int m, int n) noexcept nogil:
    cdef int s = m + n
    cdef int t = 2 * ns - m - n
    return s if s < t else t


def chi_block(int ns, int m1, int n1, int n2, const double[:, ::1] binom):
    """Normalized structure constants for the product block (m1, n1) x (n1, n2).

    Returns an array indexed ``[i1, i2, i]`` with ``h1 = |m1-n1| + 2*i1``,
    ``h2 = |n1-n2| + 2*i2`` and ``h = |m1-n2| + 2*i``.
    """
    cdef int h1min = abs(m1 - n1)
    cdef int h2min = abs(n1 - n2)
    cdef int hmin = abs(m1 - n2)
    cdef int n_h1 = (_hmax(ns, m1, n1) - h1min) // 2 + 1
    cdef int n_h2 = (_hmax(ns, n1, n2) - h2min) // 2 + 1
    cdef int n_h = (_hmax(ns, m1, n2) - hmin) // 2 + 1
    out_arr = np.zeros((n_h1, n_h2, n_h), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr

    cdef int i1, i2, i, h1, h2, h, k1, k2, k3, k4
    cdef int a0, b0, c0, e0, a1, b1, c1, e1, a2, b2, c2, e2
    cdef double cnt, k_left, k_right, k_out

    with nogil:
        for i1 in range(n_h1):
            h1 = h1min + 2 * i1
            a1 = (h1 + m1 - n1) // 2
            b1 = (h1 - m1 + n1) // 2
            c1 = (m1 + n1 - h1) // 2
            e1 = ns - h1 - c1
            k_left = _norm(ns, m1, n1, h1, binom)
            for i2 in range(n_h2):
                h2 = h2min + 2 * i2
                a2 = (h2 + n1 - n2) // 2
                b2 = (h2 - n1 + n2) // 2
                c2 = (n1 + n2 - h2) // 2
                e2 = ns - h2 - c2
                k_right = _norm(ns, n1, n2, h2, binom)
                for i in range(n_h):
                    h = hmin + 2 * i
                    a0 = (h + m1 - n2) // 2
                    b0 = (h - m1 + n2) // 2
                    c0 = (m1 + n2 - h) // 2
                    e0 = ns - h - c0
                    cnt = 0.0
                    for k3 in range(a0 + 1):
                        k1 = a1 - k3
                        k4 = b2 - k1
                        k2 = a2 - a0 + k3
                        if k1 < 0 or k1 > c0 or k2 < 0 or k2 > e0 or k4 < 0 or k4 > b0:
                            continue
                        if b1 != k2 + b0 - k4 or c1 != c0 - k1 + a0 - k3:
                            continue
                        if e1 != e0 - k2 + k4 or c2 != c0 - k1 + b0 - k4 or e2 != e0 - k2 + k3:
                            continue
                        cnt = cnt + binom[c0, k1] * binom[e0, k2] * binom[a0, k3] * binom[b0, k4]
                    if cnt != 0.0:
                        k_out = _norm(ns, m1, n2, h, binom)
                        out[i1, i2, i] = cnt * k_out / (k_left * k_right)
    return out_arr
