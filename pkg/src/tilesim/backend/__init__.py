"""Array-kernel backend selection.

The compiled extension (tilesim._ftzcore, Cython) is preferred when it
imports; otherwise the numpy fallback is used. Both are bit-identical (the
test suite asserts this). Selection can be forced with the environment
variable TILESIM_BACKEND=py|compiled before first import.

F64 (shadow-mode) arrays always take the numpy path: they are plain IEEE
doubles with no rounding or flushing, so there is nothing to accelerate.
"""

from __future__ import annotations

import os

import numpy as np

from . import _ftz_py

_ftzcore = None
_want = os.environ.get("TILESIM_BACKEND", "auto").lower()
if _want in ("auto", "compiled"):
    try:
        from tilesim import _ftzcore  # type: ignore[no-redef]
    except ImportError:
        _ftzcore = None
        if _want == "compiled":
            raise ImportError(
                "TILESIM_BACKEND=compiled but tilesim._ftzcore is not built; "
                "run `python setup.py build_ext --inplace`"
            )

ACTIVE = "compiled" if _ftzcore is not None else "python"

_F64 = 2


def _f32c(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float32)


if _ftzcore is not None:

    def round_to_fmt(a, fmt: int) -> np.ndarray:
        if fmt == _F64:
            return _ftz_py.round_to_fmt(a, fmt)
        a = _f32c(a)
        out = np.empty_like(a)
        _ftzcore.round_to_fmt(a.reshape(-1), fmt, out.reshape(-1))
        return out

    def eltwise(op: int, a, b, fmt: int) -> np.ndarray:
        if fmt == _F64:
            return _ftz_py.eltwise(op, a, b, fmt)
        a = _f32c(a)
        out = np.empty_like(a)
        _ftzcore.eltwise(op, a.reshape(-1), _f32c(b).reshape(-1), fmt, out.reshape(-1))
        return out

    def scale(alpha: float, a, fmt: int) -> np.ndarray:
        if fmt == _F64:
            return _ftz_py.scale(alpha, a, fmt)
        a = _f32c(a)
        out = np.empty_like(a)
        _ftzcore.scale(np.float32(alpha), a.reshape(-1), fmt, out.reshape(-1))
        return out

    def axpy(alpha: float, x, y, fmt: int) -> np.ndarray:
        if fmt == _F64:
            return _ftz_py.axpy(alpha, x, y, fmt)
        x = _f32c(x)
        out = np.empty_like(x)
        _ftzcore.axpy(np.float32(alpha), x.reshape(-1), _f32c(y).reshape(-1), fmt, out.reshape(-1))
        return out

    def reduce_tile(a, fmt: int) -> float:
        if fmt == _F64:
            return _ftz_py.reduce_tile(a, fmt)
        return _ftzcore.reduce_tile(_f32c(a).reshape(-1), fmt)

    def matmul_8x16(a, b, fmt: int) -> np.ndarray:
        if fmt == _F64:
            return _ftz_py.matmul_8x16(a, b, fmt)
        out = np.empty((8, 16), dtype=np.float32)
        _ftzcore.matmul_8x16(_f32c(a), _f32c(b), fmt, out)
        return out

else:
    round_to_fmt = _ftz_py.round_to_fmt
    eltwise = _ftz_py.eltwise
    scale = _ftz_py.scale
    axpy = _ftz_py.axpy
    reduce_tile = _ftz_py.reduce_tile
    matmul_8x16 = _ftz_py.matmul_8x16
