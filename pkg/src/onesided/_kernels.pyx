# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops; semantics match _pykernels.py."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.int32_t i32


def matching_cover(eu, ev, Py_ssize_t n):
    cdef i64[::1] a = np.ascontiguousarray(eu, dtype=np.int64)
    cdef i64[::1] b = np.ascontiguousarray(ev, dtype=np.int64)
    out = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] cov = out
    cdef Py_ssize_t i, m = a.shape[0]
    cdef i64 u, v
    for i in range(m):
        u = a[i]
        v = b[i]
        if cov[u] == 0 and cov[v] == 0:
            cov[u] = 1
            cov[v] = 1
    return out.astype(bool)


def assign_combos(dist, combos):
    cdef double[:, ::1] d = np.ascontiguousarray(dist, dtype=np.float64)
    cdef i64[:, ::1] cb = np.ascontiguousarray(combos, dtype=np.int64)
    cdef Py_ssize_t n = d.shape[0], g = cb.shape[0], k = cb.shape[1]
    out = np.empty((g, n), dtype=np.int32)
    cdef i32[:, ::1] lab = out
    cdef Py_ssize_t gi, x, a
    cdef double best, val
    cdef i32 arg
    for gi in range(g):
        for x in range(n):
            best = d[x, cb[gi, 0]]
            arg = 0
            for a in range(1, k):
                val = d[x, cb[gi, a]]
                if val < best:
                    best = val
                    arg = <i32>a
            lab[gi, x] = arg
    return out


cdef _color_counts(i64[::1] indptr, i64[::1] indices, i64[::1] colors, Py_ssize_t k):
    cdef Py_ssize_t n = colors.shape[0], x, j
    counts = np.zeros((n, k), dtype=np.int64)
    cdef i64[:, ::1] cnt = counts
    cdef i64 c
    for x in range(n):
        for j in range(indptr[x], indptr[x + 1]):
            c = colors[indices[j]]
            if c >= 0:
                cnt[x, c] += 1
    return counts


def uncolor_fixpoint(indptr, indices, colors, Py_ssize_t k, double threshold):
    cdef i64[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef i64[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    col_arr = np.array(colors, dtype=np.int64)
    cdef i64[::1] col = col_arr
    counts = _color_counts(ip, ix, col, k)
    cdef i64[:, ::1] cnt = counts
    cdef Py_ssize_t n = col.shape[0], x, j, c2
    cdef i64 c
    cdef int passes = 0
    cdef bint changed = True
    while changed:
        changed = False
        passes += 1
        for x in range(n):
            c = col[x]
            if c < 0:
                continue
            for c2 in range(k):
                if c2 != c and cnt[x, c2] < threshold:
                    col[x] = -1
                    for j in range(ip[x], ip[x + 1]):
                        cnt[ix[j], c] -= 1
                    changed = True
                    break
    return col_arr, passes


def safe_recolor_fixpoint(indptr, indices, colors, Py_ssize_t k):
    cdef i64[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef i64[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    col_arr = np.array(colors, dtype=np.int64)
    cdef i64[::1] col = col_arr
    counts = _color_counts(ip, ix, col, k)
    cdef i64[:, ::1] cnt = counts
    cdef Py_ssize_t n = col.shape[0], x, j, c
    cdef i64 missing
    cdef Py_ssize_t used
    cdef int passes = 0
    cdef bint changed = True
    while changed:
        changed = False
        passes += 1
        for x in range(n):
            if col[x] >= 0:
                continue
            missing = -1
            used = 0
            for c in range(k):
                if cnt[x, c] > 0:
                    used += 1
                else:
                    missing = c
            if used == k - 1:
                col[x] = missing
                for j in range(ip[x], ip[x + 1]):
                    cnt[ix[j], missing] += 1
                changed = True
    return col_arr, passes
