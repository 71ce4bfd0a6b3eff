"""Pure numpy implementation of the hot FTZ array kernels.

This is the fallback used when the compiled extension (tilesim._ftzcore) is
unavailable. Results are bit-identical to the compiled kernels; the ordered
reductions and the blocked matmul fall back to explicit Python loops because
their per-step rounding cannot be vectorized.

Format codes: 0 = BF16, 1 = FP32, 2 = F64 (F64 is plain double, no FTZ).
"""

from __future__ import annotations

import struct

import numpy as np

BF16, FP32, F64 = 0, 1, 2

_EXP = np.uint32(0x7F800000)
_MANT = np.uint32(0x007FFFFF)
_SIGN = np.uint32(0x80000000)

_OPS = {0: np.add, 1: np.subtract, 2: np.multiply}


def _round_inplace(out: np.ndarray, fmt: int) -> np.ndarray:
    """Round a float32 array to the fmt grid and flush subnormals, in place."""
    u = out.view(np.uint32)
    if fmt == BF16:
        nan = ((u & _EXP) == _EXP) & ((u & _MANT) != 0)
        r = (u + np.uint32(0x7FFF) + ((u >> np.uint32(16)) & np.uint32(1))) & np.uint32(0xFFFF0000)
        if nan.any():
            r[nan] = (u[nan] & np.uint32(0xFFFF0000)) | np.uint32(0x00400000)
        u[...] = r
    sub = ((u & _EXP) == 0) & ((u & _MANT) != 0)
    if sub.any():
        u[sub] &= _SIGN
    return out


def round_to_fmt(a, fmt: int) -> np.ndarray:
    if fmt == F64:
        return np.array(a, dtype=np.float64)
    out = np.array(a, dtype=np.float32)
    return _round_inplace(out, fmt)


def eltwise(op: int, a: np.ndarray, b: np.ndarray, fmt: int) -> np.ndarray:
    if fmt == F64:
        return _OPS[op](a, b)
    with np.errstate(under="ignore", over="ignore", invalid="ignore"):
        c = _OPS[op](a, b, dtype=np.float32)
    return _round_inplace(c, fmt)


def scale(alpha: float, a: np.ndarray, fmt: int) -> np.ndarray:
    if fmt == F64:
        return alpha * a
    with np.errstate(under="ignore", over="ignore", invalid="ignore"):
        c = np.multiply(np.float32(alpha), a, dtype=np.float32)
    return _round_inplace(c, fmt)


def axpy(alpha: float, x: np.ndarray, y: np.ndarray, fmt: int) -> np.ndarray:
    """out = round(round(alpha*x) + y), elementwise (two roundings)."""
    if fmt == F64:
        return alpha * x + y
    with np.errstate(under="ignore", over="ignore", invalid="ignore"):
        t = np.multiply(np.float32(alpha), x, dtype=np.float32)
        _round_inplace(t, fmt)
        t = np.add(t, y, dtype=np.float32)
    return _round_inplace(t, fmt)


# -- ordered reductions -------------------------------------------------------

def _d2f_bits(x: float) -> int:
    """RNE a double to float32 and return the bit pattern (overflow -> inf)."""
    try:
        return struct.unpack("<I", struct.pack("<f", x))[0]
    except OverflowError:
        with np.errstate(over="ignore"):
            return int(np.float32(x).view(np.uint32))


def _bf16_round_scalar(x: float) -> float:
    # double -> f32 is RNE and f32 -> bf16 re-rounding is innocuous, so this
    # equals a direct RNE of the exact value to the BF16 grid.
    u = _d2f_bits(x)
    if (u & 0x7F800000) == 0x7F800000 and (u & 0x007FFFFF) != 0:
        u = (u & 0xFFFF0000) | 0x00400000
    else:
        u = ((u + 0x7FFF + ((u >> 16) & 1)) & 0xFFFFFFFF) & 0xFFFF0000
    if (u & 0x7F800000) == 0 and (u & 0x007FFFFF) != 0:
        u &= 0x80000000
    return struct.unpack("<f", struct.pack("<I", u))[0]


def _f32_round_scalar(x: float) -> float:
    u = _d2f_bits(x)
    if (u & 0x7F800000) == 0 and (u & 0x007FFFFF) != 0:
        u &= 0x80000000
    return struct.unpack("<f", struct.pack("<I", u))[0]


def _block_sum_slow(vals, fmt: int) -> float:
    rnd = _bf16_round_scalar if fmt == BF16 else _f32_round_scalar
    acc = vals[0]
    for v in vals[1:]:
        acc = rnd(acc + v)
    return acc


def _block_sum_f32_fast(block: np.ndarray) -> float | None:
    """Left-to-right f32 sum via cumsum; valid unless an intermediate is
    subnormal (then the FTZ flush could alter later steps)."""
    with np.errstate(under="ignore", over="ignore", invalid="ignore"):
        c = np.cumsum(block, dtype=np.float32)
    u = c.view(np.uint32)
    sub = ((u & _EXP) == 0) & ((u & _MANT) != 0)
    if sub.any():
        return None
    return float(c[-1])


def reduce_tile(a: np.ndarray, fmt: int) -> float:
    """Defined-order tile sum: each 256-element physical block is folded
    left-to-right starting from its first element, then the four block sums
    are folded left-to-right. Every add rounds to fmt and flushes."""
    a = np.ascontiguousarray(a).reshape(1024)
    if fmt == F64:
        sums = [float(np.cumsum(a[k * 256:(k + 1) * 256])[-1]) for k in range(4)]
        total = sums[0]
        for s in sums[1:]:
            total = total + s
        return total
    sums = []
    for k in range(4):
        block = a[k * 256:(k + 1) * 256]
        s = _block_sum_f32_fast(block) if fmt == FP32 else None
        if s is None:
            s = _block_sum_slow(block.tolist(), fmt)
        sums.append(s)
    rnd = _bf16_round_scalar if fmt == BF16 else _f32_round_scalar
    total = sums[0]
    for s in sums[1:]:
        total = rnd(total + s)
    return total


def matmul_8x16(a: np.ndarray, b: np.ndarray, fmt: int) -> np.ndarray:
    """(8x16) x (16x16) -> (8x16), products and adds rounded at every step,
    k accumulated in ascending order starting from the k=0 product."""
    if fmt == F64:
        out = np.zeros((8, 16), dtype=np.float64)
        for i in range(8):
            for j in range(16):
                acc = a[i, 0] * b[0, j]
                for k in range(1, 16):
                    acc = acc + a[i, k] * b[k, j]
                out[i, j] = acc
        return out
    rnd = _bf16_round_scalar if fmt == BF16 else _f32_round_scalar
    al = a.tolist()
    bl = b.tolist()
    out = np.zeros((8, 16), dtype=np.float32)
    for i in range(8):
        ai = al[i]
        for j in range(16):
            acc = rnd(ai[0] * bl[0][j])
            for k in range(1, 16):
                acc = rnd(acc + rnd(ai[k] * bl[k][j]))
            out[i, j] = acc
    return out
