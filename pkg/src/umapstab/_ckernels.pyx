# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.  See ``_pykernels`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()


def floyd_warshall(double[:, ::1] d):
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double dik, cand
    with nogil:
        for k in range(n):
            for i in range(n):
                dik = d[i, k]
                if dik == INFINITY:
                    continue
                for j in range(n):
                    cand = dik + d[k, j]
                    if cand < d[i, j]:
                        d[i, j] = cand


cdef inline Py_ssize_t _find(int64_t[::1] parent, Py_ssize_t a) nogil:
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


def threshold_labels(const double[:, ::1] d, double s):
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t i, j, ri, rj
    out = np.arange(n, dtype=np.int64)
    cdef int64_t[::1] parent = out
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                if d[i, j] <= s:
                    ri = _find(parent, i)
                    rj = _find(parent, j)
                    if ri < rj:
                        parent[rj] = ri
                    elif rj < ri:
                        parent[ri] = rj
        for i in range(n):
            parent[i] = _find(parent, i)
    return out


def merge_sequence(Py_ssize_t n, const int64_t[::1] us, const int64_t[::1] vs):
    cdef Py_ssize_t m = us.shape[0]
    cdef Py_ssize_t e, ru, rv, lo, hi, count = 0
    parent_arr = np.arange(n, dtype=np.int64)
    cdef int64_t[::1] parent = parent_arr
    eidx_arr = np.empty(m, dtype=np.int64)
    abs_arr = np.empty(m, dtype=np.int64)
    into_arr = np.empty(m, dtype=np.int64)
    cdef int64_t[::1] eidx = eidx_arr
    cdef int64_t[::1] absorbed = abs_arr
    cdef int64_t[::1] into = into_arr
    with nogil:
        for e in range(m):
            ru = _find(parent, us[e])
            rv = _find(parent, vs[e])
            if ru == rv:
                continue
            if ru < rv:
                lo = ru
                hi = rv
            else:
                lo = rv
                hi = ru
            parent[hi] = lo
            eidx[count] = e
            absorbed[count] = hi
            into[count] = lo
            count += 1
    return eidx_arr[:count].copy(), abs_arr[:count].copy(), into_arr[:count].copy()


cdef inline int _top_bit(uint64_t[:, ::1] rows, Py_ssize_t r, Py_ssize_t nwords) nogil:
    cdef Py_ssize_t w
    cdef uint64_t x
    cdef int b
    for w in range(nwords - 1, -1, -1):
        x = rows[r, w]
        if x:
            b = 63
            while not (x >> b) & 1:
                b -= 1
            return <int>(w * 64 + b)
    return -1


def gf2_rank(uint64_t[:, ::1] rows):
    cdef Py_ssize_t nrows = rows.shape[0]
    cdef Py_ssize_t nwords = rows.shape[1]
    cdef Py_ssize_t nbits = nwords * 64
    cdef Py_ssize_t r, w
    cdef int top
    cdef Py_ssize_t rank = 0
    pivot_arr = np.full(nbits, -1, dtype=np.int64)
    cdef int64_t[::1] pivot = pivot_arr
    with nogil:
        for r in range(nrows):
            while True:
                top = _top_bit(rows, r, nwords)
                if top < 0:
                    break
                if pivot[top] < 0:
                    pivot[top] = r
                    rank += 1
                    break
                for w in range(nwords):
                    rows[r, w] ^= rows[pivot[top], w]
    return rank
