# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled FTZ array kernels (hot path).

Bit-identical twin of tilesim.backend._ftz_py for format codes 0 (BF16) and
1 (FP32); F64 never reaches this module. All arithmetic is single-precision
IEEE with round-to-nearest-even, re-rounded to the target grid and flushed
to signed zero after every operation.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef union _pun:
    float f
    unsigned int u


cdef inline unsigned int _ftz_bits(unsigned int u) nogil:
    if (u & 0x7F800000u) == 0u and (u & 0x007FFFFFu) != 0u:
        return u & 0x80000000u
    return u


cdef inline unsigned int _bf16_bits(unsigned int u) nogil:
    cdef unsigned int r
    if (u & 0x7F800000u) == 0x7F800000u and (u & 0x007FFFFFu) != 0u:
        return (u & 0xFFFF0000u) | 0x00400000u
    r = (u + 0x7FFFu + ((u >> 16) & 1u)) & 0xFFFF0000u
    return r


cdef inline float _round_f(float x, int fmt) nogil:
    cdef _pun p
    p.f = x
    if fmt == 0:
        p.u = _bf16_bits(p.u)
    p.u = _ftz_bits(p.u)
    return p.f


def round_to_fmt(float[::1] a, int fmt, float[::1] out):
    cdef Py_ssize_t i, n = a.shape[0]
    for i in range(n):
        out[i] = _round_f(a[i], fmt)


def eltwise(int op, float[::1] a, float[::1] b, int fmt, float[::1] out):
    cdef Py_ssize_t i, n = a.shape[0]
    cdef float c
    for i in range(n):
        if op == 0:
            c = a[i] + b[i]
        elif op == 1:
            c = a[i] - b[i]
        else:
            c = a[i] * b[i]
        out[i] = _round_f(c, fmt)


def scale(float alpha, float[::1] a, int fmt, float[::1] out):
    cdef Py_ssize_t i, n = a.shape[0]
    for i in range(n):
        out[i] = _round_f(alpha * a[i], fmt)


def axpy(float alpha, float[::1] x, float[::1] y, int fmt, float[::1] out):
    cdef Py_ssize_t i, n = x.shape[0]
    cdef float t
    for i in range(n):
        t = _round_f(alpha * x[i], fmt)
        out[i] = _round_f(t + y[i], fmt)


def reduce_tile(float[::1] a, int fmt):
    """Defined-order tile sum: fold each 256-element block left-to-right from
    its first element, then fold the four block sums left-to-right."""
    cdef float sums[4]
    cdef float acc, total
    cdef Py_ssize_t blk, i, base
    for blk in range(4):
        base = blk * 256
        acc = a[base]
        for i in range(1, 256):
            acc = _round_f(acc + a[base + i], fmt)
        sums[blk] = acc
    total = sums[0]
    for blk in range(1, 4):
        total = _round_f(total + sums[blk], fmt)
    return float(total)


def matmul_8x16(float[:, ::1] a, float[:, ::1] b, int fmt, float[:, ::1] out):
    cdef Py_ssize_t i, j, k
    cdef float acc
    for i in range(8):
        for j in range(16):
            acc = _round_f(a[i, 0] * b[0, j], fmt)
            for k in range(1, 16):
                acc = _round_f(acc + _round_f(a[i, k] * b[k, j], fmt), fmt)
            out[i, j] = acc
