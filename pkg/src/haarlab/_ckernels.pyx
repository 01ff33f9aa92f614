# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the loops in _pykernels; same signatures and results."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t

cnp.import_array()


cdef int64_t _SAFE = (<int64_t>1) << 62


def convolve_mod_1d(a, b, int64_t q):
    cdef int64_t[::1] av = np.ascontiguousarray(a, dtype=np.int64)
    cdef int64_t[::1] bv = np.ascontiguousarray(b, dtype=np.int64)
    cdef Py_ssize_t na = av.shape[0], nb = bv.shape[0], i, j
    if na == 0 or nb == 0:
        return np.zeros(max(na + nb - 1, 0), dtype=np.int64)
    out = np.zeros(na + nb - 1, dtype=np.int64)
    cdef int64_t[::1] ov = out
    cdef int64_t x
    # reduce once at the end when the raw sums cannot overflow
    cdef bint lazy = (q - 1) * (q - 1) < _SAFE // min(na, nb)
    with nogil:
        for i in range(na):
            x = av[i]
            if x == 0:
                continue
            if lazy:
                for j in range(nb):
                    ov[i + j] += x * bv[j]
            else:
                for j in range(nb):
                    if bv[j]:
                        ov[i + j] = (ov[i + j] + x * bv[j] % q) % q
        if lazy:
            for i in range(na + nb - 1):
                ov[i] = ov[i] % q
    return out


def convolve_mod_2d(a, b, int64_t q):
    cdef int64_t[:, ::1] av = np.ascontiguousarray(a, dtype=np.int64)
    cdef int64_t[:, ::1] bv = np.ascontiguousarray(b, dtype=np.int64)
    cdef Py_ssize_t ha = av.shape[0], wa = av.shape[1]
    cdef Py_ssize_t hb = bv.shape[0], wb = bv.shape[1]
    cdef Py_ssize_t i, j, k, l
    out = np.zeros((ha + hb - 1, wa + wb - 1), dtype=np.int64)
    cdef int64_t[:, ::1] ov = out
    cdef int64_t x
    with nogil:
        for i in range(ha):
            for j in range(wa):
                x = av[i, j]
                if x == 0:
                    continue
                for k in range(hb):
                    for l in range(wb):
                        if bv[k, l]:
                            ov[i + k, j + l] = (ov[i + k, j + l] + x * bv[k, l] % q) % q
    return out


def lca_step_1d(states, offsets, coeffs, int64_t q):
    cdef int64_t[:, :, ::1] sv = np.ascontiguousarray(states, dtype=np.int64)
    cdef int64_t[::1] offv = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef int64_t[:, :, ::1] fv = np.ascontiguousarray(coeffs, dtype=np.int64)
    cdef Py_ssize_t S = sv.shape[0], L = sv.shape[1], J = sv.shape[2], K = offv.shape[0]
    cdef Py_ssize_t s, m, k, r, c
    cdef int64_t acc
    src_arr = np.empty((K, L), dtype=np.intp)
    cdef Py_ssize_t[:, ::1] src = src_arr
    for k in range(K):
        for m in range(L):
            src[k, m] = ((m + offv[k]) % L + L) % L
    cdef bint lazy = (q - 1) * (q - 1) < _SAFE // max(K * J, 1)
    out = np.zeros((S, L, J), dtype=np.int64)
    cdef int64_t[:, :, ::1] ov = out
    with nogil:
        for s in range(S):
            for m in range(L):
                for r in range(J):
                    acc = 0
                    if lazy:
                        for k in range(K):
                            for c in range(J):
                                acc += fv[k, r, c] * sv[s, src[k, m], c]
                        ov[s, m, r] = acc % q
                    else:
                        for k in range(K):
                            for c in range(J):
                                acc = (acc + fv[k, r, c] * sv[s, src[k, m], c]) % q
                        ov[s, m, r] = acc
    return out


def transfer_forward(eta, qstack, qindex, mult):
    cdef double complex[::1] ev = np.ascontiguousarray(eta, dtype=np.complex128)
    cdef double complex[:, :, ::1] qv = np.ascontiguousarray(qstack, dtype=np.complex128)
    cdef Py_ssize_t[::1] iv = np.ascontiguousarray(qindex, dtype=np.intp)
    cdef double complex[:, :, ::1] mv = np.ascontiguousarray(mult, dtype=np.complex128)
    cdef Py_ssize_t B = mv.shape[0], T = mv.shape[1], n = mv.shape[2]
    cdef Py_ssize_t b, t, i, j, qi
    cdef double complex acc
    out = np.zeros(B, dtype=np.complex128)
    cdef double complex[::1] outv = out
    work = np.zeros((2, n), dtype=np.complex128)
    cdef double complex[:, ::1] w = work
    cdef int cur
    with nogil:
        for b in range(B):
            cur = 0
            for i in range(n):
                w[0, i] = mv[b, 0, i] * ev[i]
            for t in range(1, T):
                qi = iv[t - 1]
                for i in range(n):
                    acc = 0
                    for j in range(n):
                        acc = acc + qv[qi, i, j] * w[cur, j]
                    w[1 - cur, i] = acc * mv[b, t, i]
                cur = 1 - cur
            acc = 0
            for i in range(n):
                acc = acc + w[cur, i]
            outv[b] = acc
    return out
