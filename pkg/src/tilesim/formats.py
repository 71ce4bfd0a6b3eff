"""Reduced-precision scalar formats with flush-to-zero semantics.

Two device formats are modeled: BF16 (1 sign / 8 exponent / 7 mantissa bits)
and FP32 (IEEE-754 single). The compute units never produce or consume
subnormal values: subnormal inputs are treated as zero and subnormal results
are flushed to signed zero. Rounding is round-to-nearest-even everywhere.
NaN and infinities propagate per IEEE-754.

F64 is a shadow format used only by oracles and the solver's double-precision
shadow mode: plain IEEE double, no rounding, no flushing. It is never legal on
the modeled device.

All scalars are carried as Python floats whose values lie exactly on the
format grid; BF16 and FP32 values are exactly representable in a double.
"""

from __future__ import annotations

import enum
import math

import numpy as np

__all__ = [
    "ScalarFmt",
    "scalar_from_f64",
    "ftz_add",
    "ftz_sub",
    "ftz_mul",
    "ftz_div",
    "f32_bits",
    "bf16_bits",
    "is_ftz_clean",
]

_EXP_MASK = 0x7F800000
_MANT_MASK = 0x007FFFFF
_SIGN_MASK = 0x80000000


class ScalarFmt(enum.Enum):
    """Element format of tiles and scalars."""

    BF16 = "bf16"
    FP32 = "fp32"
    F64 = "f64"  # shadow mode / oracles only, not a device format

    @property
    def byte_width(self) -> int:
        return {ScalarFmt.BF16: 2, ScalarFmt.FP32: 4, ScalarFmt.F64: 8}[self]

    @property
    def np_dtype(self):
        return np.float64 if self is ScalarFmt.F64 else np.float32

    @property
    def code(self) -> int:
        """Integer code used by the array backends (0=BF16, 1=FP32, 2=F64)."""
        return {ScalarFmt.BF16: 0, ScalarFmt.FP32: 1, ScalarFmt.F64: 2}[self]

    @property
    def is_device_fmt(self) -> bool:
        return self is not ScalarFmt.F64

    @property
    def smallest_normal(self) -> float:
        # BF16 shares the f32 exponent range.
        if self is ScalarFmt.F64:
            return 2.2250738585072014e-308
        return 2.0 ** -126

    @classmethod
    def parse(cls, name: str) -> "ScalarFmt":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown scalar format: {name!r}") from None


def _to_f32_bits(x: float) -> int:
    """Round a double to float32 (RNE) and return the bit pattern."""
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        f = np.float32(x)
    return int(f.view(np.uint32))


def _from_f32_bits(u: int) -> float:
    return float(np.uint32(u).view(np.float32))


def _ftz_bits(u: int) -> int:
    if (u & _EXP_MASK) == 0 and (u & _MANT_MASK) != 0:
        return u & _SIGN_MASK
    return u


def _bf16_round_bits(u: int) -> int:
    """RNE-truncate a float32 bit pattern to the BF16 grid (still 32-bit)."""
    if (u & _EXP_MASK) == _EXP_MASK and (u & _MANT_MASK) != 0:
        return (u & 0xFFFF0000) | 0x00400000  # quiet the NaN, keep sign
    r = (u + 0x7FFF + ((u >> 16) & 1)) & 0xFFFFFFFF
    return r & 0xFFFF0000


def scalar_from_f64(x: float, fmt: ScalarFmt) -> float:
    """Round into fmt (nearest-even); subnormal results flush to signed zero.

    Total on floats: overflow gives +-inf, NaN stays NaN.
    """
    if fmt is ScalarFmt.F64:
        return float(x)
    u = _to_f32_bits(x)
    if fmt is ScalarFmt.BF16:
        u = _bf16_round_bits(u)
    return _from_f32_bits(_ftz_bits(u))


def _binop(a: float, b: float, op: str, fmt: ScalarFmt) -> float:
    if fmt is ScalarFmt.F64:
        if op == "add":
            return a + b
        if op == "sub":
            return a - b
        if op == "mul":
            return a * b
        with np.errstate(divide="ignore", invalid="ignore"):
            return float(np.float64(a) / np.float64(b))
    # Inputs are fmt-exact, so the f32 conversion is exact; the single f32
    # operation below is RNE, and re-rounding f32 -> BF16 is an innocuous
    # double rounding (24 >= 2*8+2 significand bits).
    fa = np.float32(a)
    fb = np.float32(b)
    with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
        if op == "add":
            c = fa + fb
        elif op == "sub":
            c = fa - fb
        elif op == "mul":
            c = fa * fb
        else:
            c = fa / fb
    u = int(c.view(np.uint32))
    if fmt is ScalarFmt.BF16:
        u = _bf16_round_bits(u)
    return _from_f32_bits(_ftz_bits(u))


def ftz_add(a: float, b: float, fmt: ScalarFmt) -> float:
    return _binop(a, b, "add", fmt)


def ftz_sub(a: float, b: float, fmt: ScalarFmt) -> float:
    return _binop(a, b, "sub", fmt)


def ftz_mul(a: float, b: float, fmt: ScalarFmt) -> float:
    return _binop(a, b, "mul", fmt)


def ftz_div(a: float, b: float, fmt: ScalarFmt) -> float:
    return _binop(a, b, "div", fmt)


def f32_bits(x: float) -> int:
    """Bit pattern of x as an IEEE-754 single (x must be f32-exact or rounds)."""
    return _to_f32_bits(x)


def bf16_bits(x: float) -> int:
    """16-bit BF16 pattern of a BF16-valued float (rounds if off-grid)."""
    return _bf16_round_bits(_to_f32_bits(x)) >> 16


def is_ftz_clean(x: float, fmt: ScalarFmt) -> bool:
    """True if x is representable in fmt and not subnormal (zero/inf/NaN ok)."""
    if isinstance(x, float) and math.isnan(x):
        return True
    if fmt is ScalarFmt.F64:
        return True
    return scalar_from_f64(x, fmt) == x and (x == 0.0 or math.isinf(x) or abs(x) >= fmt.smallest_normal)
