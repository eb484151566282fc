# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for Fock-space construction.

Same signatures and results as :mod:`fermionic_nuclearity._kernels_py`.
"""
import numpy as np
from libc.math cimport fabs
from libc.stdlib cimport malloc, free

ctypedef double complex cplx


cdef inline int _popcount(long n) nogil:
    cdef int c = 0
    while n:
        n &= n - 1
        c += 1
    return c


def creation_matrix(const cplx[::1] coeffs):
    cdef Py_ssize_t d = coeffs.shape[0]
    cdef long dim = 1 << d
    out = np.zeros((dim, dim), dtype=np.complex128)
    cdef cplx[:, ::1] o = out
    cdef long n, k
    cdef int sign
    with nogil:
        for n in range(dim):
            for k in range(d):
                if (n >> k) & 1:
                    continue
                sign = -1 if (_popcount(n & ((1 << k) - 1)) & 1) else 1
                o[n | (1 << k), n] = sign * coeffs[k]
    return out


def apply_creation(const cplx[::1] coeffs, const cplx[::1] vec):
    cdef Py_ssize_t d = coeffs.shape[0]
    cdef long dim = 1 << d
    if vec.shape[0] != dim:
        raise ValueError("vector length does not match 2**len(coeffs)")
    out = np.zeros(dim, dtype=np.complex128)
    cdef cplx[::1] o = out
    cdef long n, k
    cdef int sign
    with nogil:
        for n in range(dim):
            if vec[n] == 0:
                continue
            for k in range(d):
                if (n >> k) & 1:
                    continue
                sign = -1 if (_popcount(n & ((1 << k) - 1)) & 1) else 1
                o[n | (1 << k)] = o[n | (1 << k)] + sign * coeffs[k] * vec[n]
    return out


cdef cplx _det(cplx* a, int n) nogil:
    # in-place LU with partial pivoting on a row-major n x n buffer
    cdef int i, j, r, piv
    cdef double best, cur
    cdef cplx det = 1.0
    cdef cplx f, tmp
    for i in range(n):
        piv = i
        best = fabs(a[i * n + i].real) + fabs(a[i * n + i].imag)
        for r in range(i + 1, n):
            cur = fabs(a[r * n + i].real) + fabs(a[r * n + i].imag)
            if cur > best:
                best = cur
                piv = r
        if best == 0.0:
            return 0.0
        if piv != i:
            for j in range(n):
                tmp = a[i * n + j]
                a[i * n + j] = a[piv * n + j]
                a[piv * n + j] = tmp
            det = -det
        det = det * a[i * n + i]
        for r in range(i + 1, n):
            f = a[r * n + i] / a[i * n + i]
            for j in range(i + 1, n):
                a[r * n + j] = a[r * n + j] - f * a[i * n + j]
    return det


def sector_minors(const cplx[:, ::1] x):
    """Full 2**d x 2**d matrix whose (K, J) entry is det x[K, J] for |K| = |J|."""
    cdef int d = x.shape[0]
    if x.shape[1] != d:
        raise ValueError("matrix must be square")
    cdef long dim = 1 << d
    out = np.zeros((dim, dim), dtype=np.complex128)
    cdef cplx[:, ::1] o = out
    # states grouped by popcount
    order = sorted(range(dim), key=lambda s: (bin(s).count("1"), s))
    cdef long[::1] states = np.asarray(order, dtype="l")
    cdef long[::1] start = np.zeros(d + 2, dtype="l")
    cdef long s, t, a, b, lo, hi
    cdef int n, i, j, ki, kj, pos
    cdef int rows[64]
    cdef int cols[64]
    cdef cplx* buf = <cplx*> malloc(d * d * sizeof(cplx) + sizeof(cplx))
    if buf == NULL:
        raise MemoryError()
    for a in range(dim):
        start[_popcount(states[a]) + 1] += 1
    for n in range(1, d + 2):
        start[n] += start[n - 1]
    try:
        with nogil:
            o[0, 0] = 1.0
            for n in range(1, d + 1):
                lo = start[n]
                hi = start[n + 1]
                for a in range(lo, hi):
                    s = states[a]
                    pos = 0
                    for i in range(d):
                        if (s >> i) & 1:
                            rows[pos] = i
                            pos += 1
                    for b in range(lo, hi):
                        t = states[b]
                        pos = 0
                        for j in range(d):
                            if (t >> j) & 1:
                                cols[pos] = j
                                pos += 1
                        for ki in range(n):
                            for kj in range(n):
                                buf[ki * n + kj] = x[rows[ki], cols[kj]]
                        o[s, t] = _det(buf, n)
    finally:
        free(buf)
    return out


def subset_product_sum(const double[::1] values):
    """Sum over all subsets S of prod_{k in S} values[k], by explicit enumeration."""
    cdef Py_ssize_t d = values.shape[0]
    cdef long dim = 1 << d
    cdef long mask, low
    cdef int k
    prods = np.empty(dim, dtype=np.float64)
    cdef double[::1] p = prods
    cdef double total = 0.0, comp = 0.0, y, tt
    with nogil:
        p[0] = 1.0
        for mask in range(1, dim):
            low = mask & (-mask)
            k = 0
            while (low >> k) != 1:
                k += 1
            p[mask] = p[mask ^ low] * values[k]
        # compensated summation
        for mask in range(dim):
            y = p[mask] - comp
            tt = total + y
            comp = (tt - total) - y
            total = tt
    return total
