"""Pure numpy implementations of the Fock-space kernels.

Used when the compiled extension is unavailable, and as a cross-check for it.
"""
from itertools import combinations
import math

import numpy as np

# caps the (rows, cols, n, n) temporary built per chunk in sector_minors
_CHUNK_ELEMENTS = 2_000_000


def _popcounts(dim):
    states = np.arange(dim)
    counts = np.zeros(dim, dtype=np.int64)
    s = states.copy()
    while s.any():
        counts += s & 1
        s >>= 1
    return counts


def _jw_tables(d):
    dim = 1 << d
    states = np.arange(dim)
    tables = []
    for k in range(d):
        free = states[((states >> k) & 1) == 0]
        below = _popcounts(dim)[free & ((1 << k) - 1)]
        sign = np.where(below % 2, -1.0, 1.0)
        tables.append((free, free | (1 << k), sign))
    return tables


def creation_matrix(coeffs):
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    d = coeffs.shape[0]
    dim = 1 << d
    out = np.zeros((dim, dim), dtype=np.complex128)
    for k, (src, dst, sign) in enumerate(_jw_tables(d)):
        out[dst, src] += sign * coeffs[k]
    return out


def apply_creation(coeffs, vec):
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    vec = np.ascontiguousarray(vec, dtype=np.complex128)
    d = coeffs.shape[0]
    if vec.shape[0] != 1 << d:
        raise ValueError("vector length does not match 2**len(coeffs)")
    out = np.zeros_like(vec)
    for k, (src, dst, sign) in enumerate(_jw_tables(d)):
        out[dst] += sign * coeffs[k] * vec[src]
    return out


def sector_minors(x):
    """Full 2**d x 2**d matrix whose (K, J) entry is det x[K, J] for |K| = |J|."""
    x = np.ascontiguousarray(x, dtype=np.complex128)
    d = x.shape[0]
    if x.shape != (d, d):
        raise ValueError("matrix must be square")
    dim = 1 << d
    out = np.zeros((dim, dim), dtype=np.complex128)
    out[0, 0] = 1.0
    for n in range(1, d + 1):
        combos = np.array(list(combinations(range(d), n)), dtype=np.int64)
        masks = (1 << combos).sum(axis=1)
        c = len(combos)
        step = max(1, _CHUNK_ELEMENTS // (c * n * n))
        for lo in range(0, c, step):
            rows = combos[lo:lo + step]
            sub = x[rows[:, None, :, None], combos[None, :, None, :]]
            out[np.ix_(masks[lo:lo + step], masks)] = np.linalg.det(sub)
    return out


def subset_product_sum(values):
    """Sum over all subsets S of prod_{k in S} values[k], by explicit enumeration."""
    prods = np.ones(1)
    for v in np.asarray(values, dtype=np.float64):
        prods = np.concatenate([prods, prods * v])
    return math.fsum(prods)
