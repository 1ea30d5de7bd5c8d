# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
# cython: cdivision=True
"""Compiled kernels: batch tabulation hashing and the grid-cell loop.

Mirrors hashtrick._kernels.pure; both backends must return identical
values on identical inputs.
"""

from libc.stdint cimport int64_t, uint64_t

import numpy as np

DEF TABLE_ENTRIES = 2048


cdef inline uint64_t _dtab(const uint64_t* outer, const uint64_t* inner,
                           uint64_t key) nogil:
    cdef uint64_t derived = 0
    cdef uint64_t out = 0
    cdef Py_ssize_t c
    for c in range(8):
        derived ^= outer[(c << 8) + <Py_ssize_t>((key >> (8 * c)) & 0xFF)]
    for c in range(8):
        out ^= inner[(c << 8) + <Py_ssize_t>((derived >> (8 * c)) & 0xFF)]
    return out


def dtab_hash_batch(outer, inner, keys):
    """Hash an array of uint64 keys through one double-tabulation instance."""
    cdef const uint64_t[::1] outer_v = np.ascontiguousarray(outer, dtype=np.uint64)
    cdef const uint64_t[::1] inner_v = np.ascontiguousarray(inner, dtype=np.uint64)
    cdef const uint64_t[::1] keys_v = np.ascontiguousarray(keys, dtype=np.uint64)
    if outer_v.shape[0] != TABLE_ENTRIES or inner_v.shape[0] != TABLE_ENTRIES:
        raise ValueError("tabulation tables must be flat arrays of 2048 entries")
    out = np.empty(keys_v.shape[0], dtype=np.uint64)
    cdef uint64_t[::1] out_v = out
    cdef Py_ssize_t i, n = keys_v.shape[0]
    with nogil:
        for i in range(n):
            out_v[i] = _dtab(&outer_v[0], &inner_v[0], keys_v[i])
    return out


def run_cell(bucket_outer, bucket_inner, sign_outer, sign_inner,
             m, k, trials, eps_exponents):
    """Failure counts per epsilon for one (m, k) cell.

    Trial i projects the unit flat vector on keys i*k .. i*k + k - 1.
    With S the sum of squared signed bucket counts, the trial fails at
    epsilon 2^-t exactly when |S - k| * 2^t >= k (integer arithmetic, so
    ties are failures).
    """
    cdef const uint64_t[::1] bo = np.ascontiguousarray(bucket_outer, dtype=np.uint64)
    cdef const uint64_t[::1] bi = np.ascontiguousarray(bucket_inner, dtype=np.uint64)
    cdef const uint64_t[::1] so = np.ascontiguousarray(sign_outer, dtype=np.uint64)
    cdef const uint64_t[::1] si = np.ascontiguousarray(sign_inner, dtype=np.uint64)
    for table in (bo, bi, so, si):
        if table.shape[0] != TABLE_ENTRIES:
            raise ValueError("tabulation tables must be flat arrays of 2048 entries")
    cdef int64_t m_i = m
    cdef int64_t k_i = k
    cdef int64_t n_trials = trials
    if m_i < 1 or k_i < 1 or n_trials < 0:
        raise ValueError("need m >= 1, k >= 1, trials >= 0")
    cdef const int64_t[::1] exps = np.ascontiguousarray(eps_exponents, dtype=np.int64)
    cdef uint64_t m_u = <uint64_t>m_i
    cdef uint64_t mask = m_u - 1
    cdef bint pow2 = (m_u & (m_u - 1)) == 0

    acc_arr = np.zeros(m_i, dtype=np.int64)
    touched_arr = np.empty(k_i, dtype=np.int64)
    fails_arr = np.zeros(exps.shape[0], dtype=np.int64)
    cdef int64_t[::1] acc = acc_arr
    cdef int64_t[::1] touched = touched_arr
    cdef int64_t[::1] fails = fails_arr
    cdef Py_ssize_t n_eps = exps.shape[0]
    cdef int64_t i, j, e, s_total, v, dist, b
    cdef uint64_t key, h
    with nogil:
        for i in range(n_trials):
            for j in range(k_i):
                key = (<uint64_t>i) * (<uint64_t>k_i) + <uint64_t>j
                h = _dtab(&bo[0], &bi[0], key)
                if pow2:
                    b = <int64_t>(h & mask)
                else:
                    b = <int64_t>(h % m_u)
                if (_dtab(&so[0], &si[0], key) & 1) == 0:
                    acc[b] += 1
                else:
                    acc[b] -= 1
                touched[j] = b
            s_total = 0
            for j in range(k_i):
                b = touched[j]
                v = acc[b]
                if v != 0:
                    s_total += v * v
                    acc[b] = 0
            dist = s_total - k_i
            if dist < 0:
                dist = -dist
            if dist > 0:
                for e in range(n_eps):
                    if (dist << exps[e]) >= k_i:
                        fails[e] += 1
    return fails_arr
