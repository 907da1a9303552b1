# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled matrix-element assembly; mirrors ``dwell._assemble_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

cdef enum:
    FULL = 0
    EVEN = 1
    ODD = 2


cdef inline long _lowest_left(long a, int mode) nogil:
    if mode == FULL:
        return 0
    if mode == EVEN:
        return (a + 1) // 2
    return a // 2 + 1


cdef inline double _weight(long nl, long nr, int mode) nogil:
    if mode == FULL:
        return 1.0
    if nl == nr:
        return 0.5
    return 0.7071067811865476


cdef inline long _emit(long col, double c_col, long nl, long nr, long m, double h,
                       int mode, double sign, const long long[:] offsets,
                       long long[:] rows, long long[:] cols, double[:] vals,
                       long k) nogil:
    cdef long tmp, row
    cdef double s
    if mode == FULL:
        row = offsets[m] + nr
        if row <= col:
            rows[k] = row
            cols[k] = col
            vals[k] = h
            return k + 1
        return k
    if nl >= nr:
        s = 1.0
    else:
        tmp = nl
        nl = nr
        nr = tmp
        s = sign
    if nl == nr:
        if mode == ODD:
            return k
        s = 2.0
    row = offsets[m] + nr
    if row <= col:
        rows[k] = row
        cols[k] = col
        vals[k] = 2.0 * c_col * _weight(nl, nr, mode) * s * h
        return k + 1
    return k


def assemble(long n, bint mixture, int mode, double J, double U, double omega,
             double g, offsets):
    cdef const long long[:] offs = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef long top = n // 2 if mixture else 0
    cdef long count = 0
    cdef long m, a, nl, nr
    for m in range(top + 1):
        count += n - 2 * m + 1
    cdef cnp.ndarray[cnp.int64_t] rows_a = np.empty(7 * count + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t] cols_a = np.empty(7 * count + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t] vals_a = np.empty(7 * count + 1, dtype=np.float64)
    cdef long long[:] rows = rows_a
    cdef long long[:] cols = cols_a
    cdef double[:] vals = vals_a
    cdef double sign = -1.0 if mode == ODD else 1.0
    cdef double u_n = U / n if n > 0 else 0.0
    cdef double g_n = g / sqrt(2.0 * n) if (mixture and n > 0) else 0.0
    cdef long k = 0
    cdef long col
    cdef double c, diag
    with nogil:
        m = top
        while m >= 0:
            a = n - 2 * m
            nl = a
            while nl >= _lowest_left(a, mode):
                nr = a - nl
                col = offs[m] + nr
                c = _weight(nl, nr, mode)
                diag = u_n * (nl * (nl - 1) + nr * (nr - 1)) + omega * m
                k = _emit(col, c, nl, nr, m, diag, mode, sign, offs, rows, cols, vals, k)
                if J != 0.0:
                    if nr > 0:
                        k = _emit(col, c, nl + 1, nr - 1, m, -J * sqrt(<double>((nl + 1) * nr)),
                                  mode, sign, offs, rows, cols, vals, k)
                    if nl > 0:
                        k = _emit(col, c, nl - 1, nr + 1, m, -J * sqrt(<double>(nl * (nr + 1))),
                                  mode, sign, offs, rows, cols, vals, k)
                if g_n != 0.0:
                    if nl >= 2:
                        k = _emit(col, c, nl - 2, nr, m + 1,
                                  -g_n * sqrt(<double>((m + 1) * nl * (nl - 1))),
                                  mode, sign, offs, rows, cols, vals, k)
                    if nr >= 2:
                        k = _emit(col, c, nl, nr - 2, m + 1,
                                  -g_n * sqrt(<double>((m + 1) * nr * (nr - 1))),
                                  mode, sign, offs, rows, cols, vals, k)
                    if m > 0:
                        k = _emit(col, c, nl + 2, nr, m - 1,
                                  -g_n * sqrt(<double>(m * (nl + 1) * (nl + 2))),
                                  mode, sign, offs, rows, cols, vals, k)
                        k = _emit(col, c, nl, nr + 2, m - 1,
                                  -g_n * sqrt(<double>(m * (nr + 1) * (nr + 2))),
                                  mode, sign, offs, rows, cols, vals, k)
                nl -= 1
            m -= 1
    return rows_a[:k].copy(), cols_a[:k].copy(), vals_a[:k].copy()
