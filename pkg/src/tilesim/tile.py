"""Tiles: fixed 1024-element 2D blocks, the unit of all compute and transfer.

A tile is 32x32 or 64x16 (rows x cols). Its physical byte image is the
concatenation of four 16x16 subtiles, each stored row-major:

  32x32: [rows 0-15 x cols 0-15], [rows 0-15 x cols 16-31],
         [rows 16-31 x cols 0-15], [rows 16-31 x cols 16-31]
  64x16: [rows 0-15], [rows 16-31], [rows 32-47], [rows 48-63]

For 64x16 the physical order coincides with plain row-major order, which is
what makes one-row pointer shifts work (each 16-element row is one contiguous
32-byte run in BF16).

Tile data is held in PHYSICAL element order as a float32 (or float64 for the
shadow format) array of 1024 values that lie exactly on the format grid.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import backend
from .formats import ScalarFmt

TILE_ELEMS = 1024
SUBTILE = 16
SUBTILE_ELEMS = SUBTILE * SUBTILE

_OP_CODES = {"add": 0, "sub": 1, "mul": 2}


class TileShape(enum.Enum):
    R32x32 = (32, 32)
    R64x16 = (64, 16)

    @property
    def rows(self) -> int:
        return self.value[0]

    @property
    def cols(self) -> int:
        return self.value[1]


class ShiftDir(enum.Enum):
    """Neighbor-alignment shift directions. North/South come from circular
    buffer read-pointer offsets; East/West only exist as the composition
    transpose -> row shift -> transpose."""
    NORTH = "north"
    SOUTH = "south"
    EAST = "east"
    WEST = "west"


def _phys_from_logical(shape: TileShape) -> np.ndarray:
    """perm[r*cols + c] = physical element index."""
    rows, cols = shape.value
    r = np.arange(rows)[:, None]
    c = np.arange(cols)[None, :]
    if shape is TileShape.R32x32:
        sub = (r // SUBTILE) * 2 + (c // SUBTILE)
    else:
        sub = r // SUBTILE
    p = sub * SUBTILE_ELEMS + (r % SUBTILE) * SUBTILE + (c % SUBTILE)
    return p.reshape(-1)


_L2P = {s: _phys_from_logical(s) for s in TileShape}
_P2L = {s: np.argsort(_L2P[s]) for s in TileShape}

# Transposing each physical 16x16 subtile in place is the same index
# permutation for both shapes: swap (a, b) within every 256-element block.
_a = np.arange(TILE_ELEMS)
_TRANSPOSE_PERM = (_a // SUBTILE_ELEMS) * SUBTILE_ELEMS + (_a % SUBTILE) * SUBTILE + (_a % SUBTILE_ELEMS) // SUBTILE
del _a


@dataclass
class Tile:
    shape: TileShape
    fmt: ScalarFmt
    data: np.ndarray  # (1024,) physical order, fmt-exact values

    def __post_init__(self):
        assert self.data.shape == (TILE_ELEMS,)

    @classmethod
    def zeros(cls, shape: TileShape, fmt: ScalarFmt) -> "Tile":
        return cls(shape, fmt, np.zeros(TILE_ELEMS, dtype=fmt.np_dtype))

    @classmethod
    def full(cls, shape: TileShape, fmt: ScalarFmt, value: float) -> "Tile":
        data = np.full(TILE_ELEMS, value, dtype=fmt.np_dtype)
        return cls(shape, fmt, backend.round_to_fmt(data, fmt.code))

    @classmethod
    def from_logical(cls, arr, shape: TileShape, fmt: ScalarFmt, *, rounded: bool = False) -> "Tile":
        flat = np.asarray(arr, dtype=fmt.np_dtype).reshape(-1)
        if flat.shape != (TILE_ELEMS,):
            raise ValueError("tile data must hold 1024 elements")
        if not rounded:
            flat = backend.round_to_fmt(flat, fmt.code)
        phys = np.empty(TILE_ELEMS, dtype=fmt.np_dtype)
        phys[_L2P[shape]] = flat
        return cls(shape, fmt, phys)

    def to_logical(self) -> np.ndarray:
        """(rows, cols) array in logical row-major order."""
        return self.data[_L2P[self.shape]].reshape(self.shape.value)

    def copy(self) -> "Tile":
        return Tile(self.shape, self.fmt, self.data.copy())

    def bit_equal(self, other: "Tile") -> bool:
        if self.shape is not other.shape or self.fmt is not other.fmt:
            return False
        return bool(np.array_equal(self.data.view(np.uint8), other.data.view(np.uint8)))


def random_tile(rng: np.random.Generator, shape: TileShape, fmt: ScalarFmt,
                lo: float = -1.0, hi: float = 1.0) -> Tile:
    vals = rng.uniform(lo, hi, TILE_ELEMS)
    return Tile(shape, fmt, backend.round_to_fmt(vals, fmt.code))


def tile_linearize(t: Tile) -> bytes:
    """Physical byte image (the canonical wire/storage format)."""
    if t.fmt is ScalarFmt.BF16:
        bits = np.ascontiguousarray(t.data, dtype=np.float32).view(np.uint32)
        return (bits >> 16).astype(np.uint16).tobytes()
    return np.ascontiguousarray(t.data, dtype=t.fmt.np_dtype).tobytes()


def tile_delinearize(image: bytes, shape: TileShape, fmt: ScalarFmt) -> Tile:
    if len(image) != TILE_ELEMS * fmt.byte_width:
        raise ValueError("bad tile image size")
    if fmt is ScalarFmt.BF16:
        bits = np.frombuffer(image, dtype=np.uint16).astype(np.uint32) << 16
        data = bits.view(np.float32)
    else:
        data = np.frombuffer(image, dtype=fmt.np_dtype).copy()
    return Tile(shape, fmt, data)


def _check_pair(a: Tile, b: Tile):
    if a.shape is not b.shape or a.fmt is not b.fmt:
        raise ValueError("tile shape/format mismatch")


def tile_eltwise(op: str, a: Tile, b: Tile) -> Tile:
    """Per-element FTZ add/sub/mul of two tiles of identical shape and format."""
    _check_pair(a, b)
    code = _OP_CODES[op]
    return Tile(a.shape, a.fmt, backend.eltwise(code, a.data, b.data, a.fmt.code))


def tile_scale(c: float, t: Tile) -> Tile:
    return Tile(t.shape, t.fmt, backend.scale(c, t.data, t.fmt.code))


def tile_axpy(alpha: float, x: Tile, y: Tile) -> Tile:
    """round(round(alpha*x) + y) per element."""
    _check_pair(x, y)
    return Tile(x.shape, x.fmt, backend.axpy(alpha, x.data, y.data, x.fmt.code))


def tile_reduce_sum(t: Tile) -> float:
    """Sum of all 1024 elements in the defined order: each physical 16x16
    subtile is folded row-major left-to-right (starting from its first
    element), then the four subtile sums are folded left-to-right, every add
    in t.fmt with FTZ."""
    return backend.reduce_tile(t.data, t.fmt.code)


def tile_transpose_subtiles(t: Tile) -> Tile:
    """Independently transpose each of the four physical 16x16 subtiles;
    shape metadata is unchanged."""
    return Tile(t.shape, t.fmt, t.data[_TRANSPOSE_PERM].copy())


def tile_matmul(a: np.ndarray, b: np.ndarray, fmt: ScalarFmt) -> np.ndarray:
    """FPU block product: (8x16) x (16x16) -> (8x16), FTZ mul/add with
    k accumulated in ascending order. BF16 only."""
    if fmt is not ScalarFmt.BF16:
        raise ValueError("FPU restricted to ≤19-bit formats")
    a = np.asarray(a, dtype=np.float32)
    b = np.asarray(b, dtype=np.float32)
    if a.shape != (8, 16) or b.shape != (16, 16):
        raise ValueError("tile_matmul expects (8,16) x (16,16) blocks")
    return backend.matmul_8x16(a, b, fmt.code)
