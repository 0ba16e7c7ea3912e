# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-pixel kernels. Mirrors ``_pure.py`` bit for bit."""

import numpy as np

from libc.stdlib cimport abs as iabs
from libc.stdint cimport uint8_t, uint16_t, int32_t

NAME = "native"

cdef enum:
    N_LBP = 0
    N_MCT = 1
    N_LGP = 2
    N_LDP = 3
    N_LDP_RI = 4
    N_LOOP = 5

cdef int DY[8]
cdef int DX[8]
DY[:] = [-1, -1, -1, 0, 1, 1, 1, 0]
DX[:] = [-1, 0, 1, 1, 1, 0, -1, -1]


cdef inline int clampi(int v, int lo, int hi) noexcept nogil:
    return lo if v < lo else (hi if v > hi else v)


def blur(const uint8_t[:, ::1] src, uint8_t[:, ::1] dst):
    cdef Py_ssize_t h = src.shape[0], w = src.shape[1]
    cdef Py_ssize_t y, x, i
    cdef int taps[5]
    taps[:] = [1, 4, 6, 4, 1]
    cdef int32_t[:, ::1] horiz = np.empty((h, w), dtype=np.int32)
    cdef int32_t acc
    with nogil:
        for y in range(h):
            for x in range(w):
                acc = 0
                for i in range(5):
                    acc = acc + taps[i] * src[y, clampi(<int>x + <int>i - 2, 0, <int>w - 1)]
                horiz[y, x] = acc
        for y in range(h):
            for x in range(w):
                acc = 0
                for i in range(5):
                    acc = acc + taps[i] * horiz[clampi(<int>y + <int>i - 2, 0, <int>h - 1), x]
                dst[y, x] = <uint8_t>clampi((acc + 128) >> 8, 0, 255)


cdef inline void kirsch(const int32_t* nb, int32_t* m) noexcept nogil:
    cdef int32_t total = 0
    cdef int n
    for n in range(8):
        total += nb[n]
    for n in range(8):
        m[n] = 8 * (nb[(n + 7) & 7] + nb[n] + nb[(n + 1) & 7]) - 3 * total


cdef inline void cas(int32_t* a, int i, int j) noexcept nogil:
    cdef int32_t x = a[i], y = a[j]
    cdef int32_t lo = x if x < y else y
    a[i] = lo
    a[j] = x ^ y ^ lo


cdef inline void sort8(int32_t* a) noexcept nogil:
    # optimal 19-comparator network
    cas(a, 0, 1); cas(a, 2, 3); cas(a, 4, 5); cas(a, 6, 7)
    cas(a, 0, 2); cas(a, 1, 3); cas(a, 4, 6); cas(a, 5, 7)
    cas(a, 1, 2); cas(a, 5, 6); cas(a, 0, 4); cas(a, 3, 7)
    cas(a, 1, 5); cas(a, 2, 6)
    cas(a, 1, 4); cas(a, 3, 6)
    cas(a, 2, 4); cas(a, 3, 5)
    cas(a, 3, 4)


cdef inline void rank_order(const int32_t* m, bint absolute, int32_t* key, int* order) noexcept nogil:
    # order[r] = direction holding rank r, ranking by (key, spread, index)
    # |m| <= 3825 and spread <= 7650 fit 13-bit fields; the index rides in
    # the low 3 bits so packed values are distinct
    cdef int32_t packed[8]
    cdef int32_t a, b, spread
    cdef int n
    for n in range(8):
        key[n] = iabs(m[n]) if absolute else m[n]
        a = iabs(m[n] - m[(n + 7) & 7])
        b = iabs(m[n] - m[(n + 1) & 7])
        spread = a if a > b else b
        packed[n] = ((key[n] + 4096) << 16) | (spread << 3) | n
    sort8(packed)
    for n in range(8):
        order[n] = packed[n] & 7


cdef inline int code_at(const uint8_t* p, Py_ssize_t stride,
                        int kind, int k, bint absolute) noexcept nogil:
    # p points at the center pixel
    cdef int32_t nb[8]
    cdef int32_t m[8]
    cdef int32_t key[8]
    cdef int order[8]
    cdef int32_t c = p[0]
    cdef int32_t total = 0, kth, gsum
    cdef int n, r, top, code = 0
    for n in range(8):
        nb[n] = p[DY[n] * stride + DX[n]]
        total += nb[n]
    if kind == N_LBP:
        for n in range(8):
            code |= (nb[n] >= c) << n
    elif kind == N_MCT:
        total += c
        for n in range(8):
            code |= (9 * nb[n] >= total) << n
        code |= (9 * c >= total) << 8
    elif kind == N_LGP:
        gsum = 0
        for n in range(8):
            gsum += iabs(nb[n] - c)
        for n in range(8):
            code |= (8 * iabs(nb[n] - c) >= gsum) << n
    else:
        kirsch(nb, m)
        rank_order(m, absolute, key, order)
        if kind == N_LOOP:
            for r in range(8):
                code |= (nb[order[r]] >= c) << r
        else:
            kth = key[order[8 - k]]
            if kind == N_LDP:
                for n in range(8):
                    code |= (key[n] >= kth) << n
            else:
                top = order[7]
                for n in range(8):
                    code |= (key[n] >= kth) << ((7 - n + top) & 7)
    return code


def code_rows(const uint8_t[:, ::1] img, uint16_t[:, ::1] out, int kind, int k,
              bint absolute, Py_ssize_t r0, Py_ssize_t r1):
    cdef Py_ssize_t y, x, w = img.shape[1]
    cdef const uint8_t* row
    if kind < 0 or kind > 5:
        raise ValueError(f"unknown kernel id {kind}")
    if r1 <= r0:
        return
    with nogil:
        for y in range(r0, r1):
            row = &img[y + 1, 0]
            for x in range(w - 2):
                out[y, x] = <uint16_t>code_at(row + x + 1, w, kind, k, absolute)
