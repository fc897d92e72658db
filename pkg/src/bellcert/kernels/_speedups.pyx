# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled versions of the hot kernels (see _pure.py for the reference).

Every function matches the _pure module bit for bit: the random inputs are
drawn outside the kernels, and the integer logic is identical.
"""

import numpy as np

cimport cython
from libc.stdint cimport int8_t, int64_t, uint8_t, uint64_t

G_TABLE = np.full((2, 2, 2), -1, dtype=np.int8)
G_TABLE[0, 1, 1] = 1
G_TABLE[1, 1, 0] = 1

ANTICORRELATE = 12
POLICY_LOSS_REACTIVE = 1
POLICY_HERALD_CONDITIONED = 2

cdef int8_t[2][2][2] _G
_G[0][0][0] = -1; _G[0][0][1] = -1; _G[0][1][0] = -1; _G[0][1][1] = 1
_G[1][0][0] = -1; _G[1][0][1] = -1; _G[1][1][0] = 1;  _G[1][1][1] = -1


def accumulate_counts(h, a, b, x, y):
    cdef const int8_t[::1] hv = np.ascontiguousarray(h, dtype=np.int8)
    cdef const uint8_t[::1] av = np.ascontiguousarray(a, dtype=np.uint8)
    cdef const uint8_t[::1] bv = np.ascontiguousarray(b, dtype=np.uint8)
    cdef const int8_t[::1] xv = np.ascontiguousarray(x, dtype=np.int8)
    cdef const int8_t[::1] yv = np.ascontiguousarray(y, dtype=np.int8)
    out = np.zeros(32, dtype=np.uint64)
    cdef uint64_t[::1] ov = out
    cdef Py_ssize_t i, n = hv.shape[0]
    cdef Py_ssize_t h01, pair
    for i in range(n):
        h01 = (1 - hv[i]) >> 1
        pair = (1 - xv[i]) + ((1 - yv[i]) >> 1)
        ov[((h01 * 2 + av[i]) * 2 + bv[i]) * 4 + pair] += 1
    return out.reshape(2, 2, 2, 4)


def win_flags(h, a, b, x, y):
    cdef const int8_t[::1] hv = np.ascontiguousarray(h, dtype=np.int8)
    cdef const uint8_t[::1] av = np.ascontiguousarray(a, dtype=np.uint8)
    cdef const uint8_t[::1] bv = np.ascontiguousarray(b, dtype=np.uint8)
    cdef const int8_t[::1] xv = np.ascontiguousarray(x, dtype=np.int8)
    cdef const int8_t[::1] yv = np.ascontiguousarray(y, dtype=np.int8)
    out = np.empty(hv.shape[0], dtype=np.uint8)
    cdef uint8_t[::1] ov = out
    cdef Py_ssize_t i, n = hv.shape[0]
    for i in range(n):
        ov[i] = xv[i] * yv[i] == _G[(1 - hv[i]) >> 1][av[i]][bv[i]]
    return out


def count_wins(h, a, b, x, y):
    cdef const int8_t[::1] hv = np.ascontiguousarray(h, dtype=np.int8)
    cdef const uint8_t[::1] av = np.ascontiguousarray(a, dtype=np.uint8)
    cdef const uint8_t[::1] bv = np.ascontiguousarray(b, dtype=np.uint8)
    cdef const int8_t[::1] xv = np.ascontiguousarray(x, dtype=np.int8)
    cdef const int8_t[::1] yv = np.ascontiguousarray(y, dtype=np.int8)
    cdef Py_ssize_t i, n = hv.shape[0]
    cdef int64_t wp = 0, np_ = 0, wm = 0, nm = 0
    cdef bint win
    for i in range(n):
        win = xv[i] * yv[i] == _G[(1 - hv[i]) >> 1][av[i]][bv[i]]
        if hv[i] > 0:
            np_ += 1
            wp += win
        else:
            nm += 1
            wm += win
    return int(wp), int(np_), int(wm), int(nm)


def deterministic_outcomes(a, b, strategy):
    cdef const uint8_t[::1] av = np.ascontiguousarray(a, dtype=np.uint8)
    cdef const uint8_t[::1] bv = np.ascontiguousarray(b, dtype=np.uint8)
    cdef int k = strategy
    cdef Py_ssize_t i, n = av.shape[0]
    x = np.empty(n, dtype=np.int8)
    y = np.empty(n, dtype=np.int8)
    cdef int8_t[::1] xv = x
    cdef int8_t[::1] yv = y
    for i in range(n):
        xv[i] = 1 - 2 * ((k >> av[i]) & 1)
        yv[i] = 1 - 2 * ((k >> (2 + bv[i])) & 1)
    return x, y


def quantum_outcomes(h, a, b, x, u, p_same):
    cdef const int8_t[::1] hv = np.ascontiguousarray(h, dtype=np.int8)
    cdef const uint8_t[::1] av = np.ascontiguousarray(a, dtype=np.uint8)
    cdef const uint8_t[::1] bv = np.ascontiguousarray(b, dtype=np.uint8)
    cdef const int8_t[::1] xv = np.ascontiguousarray(x, dtype=np.int8)
    cdef const double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef const double[:, :, ::1] pv = np.ascontiguousarray(p_same, dtype=np.float64)
    cdef Py_ssize_t i, n = hv.shape[0]
    xo = np.ascontiguousarray(x, dtype=np.int8).copy()
    y = np.empty(n, dtype=np.int8)
    cdef int8_t[::1] yv = y
    for i in range(n):
        if uv[i] < pv[(1 - hv[i]) >> 1, av[i], bv[i]]:
            yv[i] = xv[i]
        else:
            yv[i] = -xv[i]
    return xo, y


def memory_outcomes(policy, h, a, b):
    cdef const int8_t[::1] hv = np.ascontiguousarray(h, dtype=np.int8)
    cdef const uint8_t[::1] av = np.ascontiguousarray(a, dtype=np.uint8)
    cdef const uint8_t[::1] bv = np.ascontiguousarray(b, dtype=np.uint8)
    cdef Py_ssize_t i, n = hv.shape[0]
    x = np.empty(n, dtype=np.int8)
    y = np.empty(n, dtype=np.int8)
    cdef int8_t[::1] xv = x
    cdef int8_t[::1] yv = y
    cdef int pol = policy
    cdef int k = ANTICORRELATE, kp = ANTICORRELATE, km = ANTICORRELATE
    cdef int h01, ai, bi, xi, yi
    cdef bint win
    for i in range(n):
        h01 = (1 - hv[i]) >> 1
        if pol == 2:
            k = kp if h01 == 0 else km
        ai = av[i]
        bi = bv[i]
        xi = 1 - 2 * ((k >> ai) & 1)
        yi = 1 - 2 * ((k >> (2 + bi)) & 1)
        xv[i] = xi
        yv[i] = yi
        win = xi * yi == _G[h01][ai][bi]
        if not win:
            if pol == 1:
                k ^= 1 << (2 + bi)
            elif h01 == 0:
                kp = (kp + 1) & 15
            else:
                km = (km + 1) & 15
    return x, y


def memory_wins_batch(policy, h2, a2, b2):
    cdef const int8_t[:, ::1] hv = np.ascontiguousarray(h2, dtype=np.int8)
    cdef const uint8_t[:, ::1] av = np.ascontiguousarray(a2, dtype=np.uint8)
    cdef const uint8_t[:, ::1] bv = np.ascontiguousarray(b2, dtype=np.uint8)
    cdef Py_ssize_t t, j, nt = hv.shape[0], n = hv.shape[1]
    wins = np.zeros(nt, dtype=np.int64)
    cdef int64_t[::1] wv = wins
    cdef int pol = policy
    cdef int k, kp, km, h01, ai, bi
    cdef int64_t w
    cdef bint win
    for t in range(nt):
        k = ANTICORRELATE
        kp = ANTICORRELATE
        km = ANTICORRELATE
        w = 0
        for j in range(n):
            h01 = (1 - hv[t, j]) >> 1
            if pol == 2:
                k = kp if h01 == 0 else km
            ai = av[t, j]
            bi = bv[t, j]
            win = (((k >> ai) ^ (k >> (2 + bi))) & 1) == (_G[h01][ai][bi] < 0)
            w += win
            if not win:
                if pol == 1:
                    k ^= 1 << (2 + bi)
                elif h01 == 0:
                    kp = (kp + 1) & 15
                else:
                    km = (km + 1) & 15
        wv[t] = w
    return wins


def deterministic_wins_batch(strategy, h2, a2, b2):
    cdef const int8_t[:, ::1] hv = np.ascontiguousarray(h2, dtype=np.int8)
    cdef const uint8_t[:, ::1] av = np.ascontiguousarray(a2, dtype=np.uint8)
    cdef const uint8_t[:, ::1] bv = np.ascontiguousarray(b2, dtype=np.uint8)
    cdef Py_ssize_t t, j, nt = hv.shape[0], n = hv.shape[1]
    wins = np.zeros(nt, dtype=np.int64)
    cdef int64_t[::1] wv = wins
    cdef int k = strategy
    cdef int64_t w
    cdef int ai, bi
    for t in range(nt):
        w = 0
        for j in range(n):
            ai = av[t, j]
            bi = bv[t, j]
            w += (((k >> ai) ^ (k >> (2 + bi))) & 1) == \
                (_G[(1 - hv[t, j]) >> 1][ai][bi] < 0)
        wv[t] = w
    return wins


def quantum_wins_batch(h2, a2, b2, x2, u2, p_same):
    cdef const int8_t[:, ::1] hv = np.ascontiguousarray(h2, dtype=np.int8)
    cdef const uint8_t[:, ::1] av = np.ascontiguousarray(a2, dtype=np.uint8)
    cdef const uint8_t[:, ::1] bv = np.ascontiguousarray(b2, dtype=np.uint8)
    cdef const int8_t[:, ::1] xv = np.ascontiguousarray(x2, dtype=np.int8)
    cdef const double[:, ::1] uv = np.ascontiguousarray(u2, dtype=np.float64)
    cdef const double[:, :, ::1] pv = np.ascontiguousarray(p_same, dtype=np.float64)
    cdef Py_ssize_t t, j, nt = hv.shape[0], n = hv.shape[1]
    wins = np.zeros(nt, dtype=np.int64)
    cdef int64_t[::1] wv = wins
    cdef int64_t w
    cdef int h01, ai, bi, xi, yi
    for t in range(nt):
        w = 0
        for j in range(n):
            h01 = (1 - hv[t, j]) >> 1
            ai = av[t, j]
            bi = bv[t, j]
            xi = xv[t, j]
            yi = xi if uv[t, j] < pv[h01, ai, bi] else -xi
            w += xi * yi == _G[h01][ai][bi]
        wv[t] = w
    return wins


def bit_agreements(bits, max_lag):
    cdef const uint8_t[::1] q = np.ascontiguousarray(bits, dtype=np.uint8)
    cdef Py_ssize_t n = q.shape[0]
    cdef int ml = max_lag
    agree = np.zeros(ml, dtype=np.int64)
    cdef int64_t[::1] av = agree
    cdef Py_ssize_t i
    cdef int lag
    for lag in range(1, ml + 1):
        if lag < n:
            for i in range(n - lag):
                av[lag - 1] += q[i] == q[i + lag]
    return agree


def count_ones(bits):
    cdef const uint8_t[::1] q = np.ascontiguousarray(bits, dtype=np.uint8)
    cdef Py_ssize_t i, n = q.shape[0]
    cdef int64_t c = 0
    for i in range(n):
        c += q[i]
    return int(c)


def block_counts(bits, length):
    cdef const uint8_t[::1] q = np.ascontiguousarray(bits, dtype=np.uint8)
    cdef Py_ssize_t nblocks = q.shape[0] // length
    cdef int L = length
    out = np.zeros(1 << L, dtype=np.int64)
    cdef int64_t[::1] ov = out
    cdef Py_ssize_t t, j
    cdef int64_t v
    for t in range(nblocks):
        v = 0
        for j in range(L):
            v = (v << 1) | q[t * L + j]
        ov[v] += 1
    return out
