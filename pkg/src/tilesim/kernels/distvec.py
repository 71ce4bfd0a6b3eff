"""Grid-to-core data distribution and distributed vectors.

The 3D domain has extents (N_x, N_y, N_z): i (x) runs west->east along tile
columns, j (y) north->south along tile rows, k (z) below->above across
layers. Element (i, j, k) has global linear index i + N_x*(j + N_y*k).

The horizontal plane is cut into 64x16 (rows x cols) tiles: N_x must divide
into 16-column strips per core column and N_y into 64-row strips per core
row. Each core owns a brick of m_x * m_y tiles per layer, all N_z layers
(the per-core "column of tiles"; m_x = m_y = 1 in the canonical layout).

Per-core tiles are kept in a canonical order, key (k, ty, tx): layer-major,
then tile-row, then tile-column. All accumulations over a core's tiles use
this order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import backend
from ..device.core import ConfigError
from ..device.noc import CoreCoord
from ..formats import ScalarFmt
from ..tile import TILE_ELEMS, Tile, TileShape

TILE_ROWS = 64
TILE_COLS = 16


@dataclass(frozen=True)
class GridDistribution:
    nx: int
    ny: int
    nz: int
    px: int
    py: int

    def __post_init__(self):
        if min(self.nx, self.ny, self.nz, self.px, self.py) < 1:
            raise ConfigError("grid extents and core counts must be positive")
        if self.nx % (TILE_COLS * self.px):
            raise ConfigError(
                f"indivisible grid dims: N_x={self.nx} not divisible by 16*P_x={16 * self.px}"
            )
        if self.ny % (TILE_ROWS * self.py):
            raise ConfigError(
                f"indivisible grid dims: N_y={self.ny} not divisible by 64*P_y={64 * self.py}"
            )

    @property
    def mx(self) -> int:
        return self.nx // (TILE_COLS * self.px)

    @property
    def my(self) -> int:
        return self.ny // (TILE_ROWS * self.py)

    @property
    def tiles_per_core(self) -> int:
        return self.mx * self.my * self.nz

    @property
    def n_elements(self) -> int:
        return self.nx * self.ny * self.nz

    def core_coords(self):
        for cy in range(self.py):
            for cx in range(self.px):
                yield CoreCoord(cx, cy)

    def tile_keys(self):
        """Canonical per-core tile order."""
        for k in range(self.nz):
            for ty in range(self.my):
                for tx in range(self.mx):
                    yield (k, ty, tx)

    def tile_index(self, k: int, ty: int, tx: int) -> int:
        return (k * self.my + ty) * self.mx + tx

    def global_index(self, i: int, j: int, k: int) -> int:
        return i + self.nx * (j + self.ny * k)

    def tile_slices(self, coord, ty: int, tx: int):
        """(j-slice, i-slice) of tile (ty, tx) on core coord in the plane."""
        cx, cy = coord
        j0 = (cy * self.my + ty) * TILE_ROWS
        i0 = (cx * self.mx + tx) * TILE_COLS
        return slice(j0, j0 + TILE_ROWS), slice(i0, i0 + TILE_COLS)


@dataclass
class DistVector:
    """A vector distributed tile-wise over a core rectangle.

    Vectors used by the solver carry a GridDistribution (dist); plain
    benchmark vectors may have dist=None with an arbitrary equal tile count
    per core.
    """

    fmt: ScalarFmt
    tiles: dict  # CoreCoord -> list[Tile] (equal lengths, canonical order)
    dist: GridDistribution | None = None

    @property
    def coords(self):
        return list(self.tiles.keys())

    @property
    def tiles_per_core(self) -> int:
        return len(next(iter(self.tiles.values())))

    @property
    def length(self) -> int:
        return self.tiles_per_core * TILE_ELEMS * len(self.tiles)

    def check_layout(self, other: "DistVector"):
        if (self.fmt is not other.fmt or self.coords != other.coords
                or self.tiles_per_core != other.tiles_per_core):
            raise ValueError("distributed vector layout mismatch")

    def bit_equal(self, other: "DistVector") -> bool:
        if self.fmt is not other.fmt or self.coords != other.coords:
            return False
        return all(
            a.bit_equal(b)
            for c in self.coords
            for a, b in zip(self.tiles[c], other.tiles[c])
        )

    def copy(self) -> "DistVector":
        return DistVector(self.fmt, {c: [t.copy() for t in ts] for c, ts in self.tiles.items()}, self.dist)

    # -- grid-mapped construction ---------------------------------------------------

    @classmethod
    def from_grid_array(cls, arr, dist: GridDistribution, fmt: ScalarFmt, *,
                        rounded: bool = False) -> "DistVector":
        """arr has shape (nz, ny, nx); values are quantized to fmt unless
        rounded=True promises they already sit on the grid."""
        arr = np.asarray(arr, dtype=fmt.np_dtype).reshape(dist.nz, dist.ny, dist.nx)
        tiles = {}
        for c in dist.core_coords():
            per_core = []
            for (k, ty, tx) in dist.tile_keys():
                js, isl = dist.tile_slices(c, ty, tx)
                per_core.append(Tile.from_logical(arr[k, js, isl], TileShape.R64x16, fmt, rounded=rounded))
            tiles[c] = per_core
        return cls(fmt, tiles, dist)

    def to_grid_array(self) -> np.ndarray:
        d = self.dist
        if d is None:
            raise ValueError("vector carries no grid distribution")
        out = np.zeros((d.nz, d.ny, d.nx), dtype=self.fmt.np_dtype)
        for c in d.core_coords():
            for idx, (k, ty, tx) in enumerate(d.tile_keys()):
                js, isl = d.tile_slices(c, ty, tx)
                out[k, js, isl] = self.tiles[c][idx].to_logical()
        return out

    @classmethod
    def zeros(cls, dist: GridDistribution, fmt: ScalarFmt) -> "DistVector":
        tiles = {c: [Tile.zeros(TileShape.R64x16, fmt) for _ in dist.tile_keys()]
                 for c in dist.core_coords()}
        return cls(fmt, tiles, dist)

    @classmethod
    def random(cls, rng: np.random.Generator, dist: GridDistribution, fmt: ScalarFmt,
               lo: float = -1.0, hi: float = 1.0) -> "DistVector":
        arr = rng.uniform(lo, hi, (dist.nz, dist.ny, dist.nx))
        return cls.from_grid_array(arr, dist, fmt)

    # -- block (benchmark) construction -----------------------------------------------

    @classmethod
    def block(cls, coords, tiles_per_core: int, fmt: ScalarFmt,
              rng: np.random.Generator | None = None, fill: float = 0.0) -> "DistVector":
        tiles = {}
        for c in coords:
            per_core = []
            for _ in range(tiles_per_core):
                if rng is None:
                    per_core.append(Tile.full(TileShape.R64x16, fmt, fill))
                else:
                    vals = rng.uniform(-1.0, 1.0, TILE_ELEMS)
                    per_core.append(Tile(TileShape.R64x16, fmt, backend.round_to_fmt(vals, fmt.code)))
            tiles[CoreCoord(*c)] = per_core
        return cls(fmt, tiles, None)
