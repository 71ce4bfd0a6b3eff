"""7-point 3D stencil on the tile grid: shifts, halo exchange, application.

Per output tile the kernel evaluates, in this fixed order,

    out = c*u  (center)
        + b*u_below + a*u_above          (vertical, local tiles)
        + n*VN + s*VS + w*VW + e*VE      (horizontal, shifted views)

where VN(r,c) = u(r-1,c) etc. North/South views come from one-row pointer
shifts on the contiguous column of tiles (interior tile boundaries cross
pages for free); East/West views are transpose -> row shift -> transpose,
with the four discontiguous boundary pieces filled from the neighboring tile
column (local copy or four NoC sends per side). Out-of-domain halos are
zero-filled, charged as slow scalar SRAM writes.

Out-of-domain *vertical* neighbors are skipped rather than added as zero
tiles; adding a zero-filled scaled halo is bit-identical to skipping it
(coeff * (+-0) = +-0 and x + (-0) == x under round-to-nearest-even), which is
what makes the tile path and the index-based oracles agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..costmodel import TILE_ELEMS, Unit, _ceil_div
from ..device.cbuf import CircularBuffer
from ..device.gridsim import Machine
from ..device.noc import CoreCoord
from ..formats import ScalarFmt, scalar_from_f64
from ..tile import ShiftDir, Tile, TileShape, tile_delinearize, tile_eltwise, tile_scale, tile_transpose_subtiles
from .distvec import TILE_COLS, TILE_ROWS, DistVector, GridDistribution

VARIANTS = ("full", "no_halo", "no_zero_fill", "neither")


@dataclass(frozen=True)
class StencilCoeffs:
    """Seven stencil scalars in the fixed order (west, north, below, center,
    east, south, above)."""
    west: float
    north: float
    below: float
    center: float
    east: float
    south: float
    above: float

    @classmethod
    def laplacian(cls) -> "StencilCoeffs":
        return cls(-1.0, -1.0, -1.0, 6.0, -1.0, -1.0, -1.0)

    def rounded(self, fmt: ScalarFmt) -> "StencilCoeffs":
        return StencilCoeffs(*(scalar_from_f64(v, fmt) for v in (
            self.west, self.north, self.below, self.center, self.east, self.south, self.above)))


# -- shifts ------------------------------------------------------------------------

def shift_tile(cb: CircularBuffer, direction: ShiftDir, fmt: ScalarFmt,
               page_index: int = 0) -> Tile:
    """North/South-component view of one 64x16 page via a one-row pointer
    offset (the same address arithmetic as cb_offset_read_ptr by -/+ one
    32-byte row). Interior pages pull the crossing row from the adjacent
    page; at the region edge the halo row is returned zeroed, to be filled
    by the exchange."""
    if direction not in (ShiftDir.NORTH, ShiftDir.SOUTH):
        raise ValueError("shift_tile handles North/South; use shift_tile_ew")
    row = TILE_COLS * fmt.byte_width
    page = TILE_ELEMS * fmt.byte_width
    if cb.page_size != page:
        raise ValueError("CB page size does not hold one tile")
    start = page_index * page
    delta = -row if direction is ShiftDir.NORTH else row
    lo = start + delta
    if 0 <= lo and lo + page <= cb.total_bytes():
        img = cb.read_view(page, extra_offset=lo)
    elif direction is ShiftDir.NORTH:
        img = bytes(row) + cb.read_view(page - row, extra_offset=start)
    else:
        img = cb.read_view(page - row, extra_offset=start + row) + bytes(row)
    return tile_delinearize(img, TileShape.R64x16, fmt)


def shift_tile_ew(t: Tile, direction: ShiftDir, halo: np.ndarray | None = None) -> Tile:
    """East/West-component view: transpose the subtiles, shift the transposed
    image by one row, overwrite the four discontiguous boundary rows with the
    neighbor column (64 values, zeros if absent), transpose back."""
    if direction not in (ShiftDir.EAST, ShiftDir.WEST):
        raise ValueError("shift_tile_ew handles East/West")
    if t.shape is not TileShape.R64x16:
        raise ValueError("E/W shifts are defined for 64x16 tiles")
    if halo is None:
        halo = np.zeros(TILE_ROWS, dtype=t.fmt.np_dtype)
    tl = tile_transpose_subtiles(t).to_logical()
    v = np.zeros_like(tl)
    if direction is ShiftDir.EAST:
        v[:TILE_ROWS - 1] = tl[1:]
        for s in range(4):
            v[16 * s + 15, :] = halo[16 * s:16 * s + 16]
    else:
        v[1:] = tl[:TILE_ROWS - 1]
        for s in range(4):
            v[16 * s, :] = halo[16 * s:16 * s + 16]
    shifted = Tile.from_logical(v, TileShape.R64x16, t.fmt, rounded=True)
    return tile_transpose_subtiles(shifted)


# -- halo exchange --------------------------------------------------------------------

def _neighbor(dist: GridDistribution, c: CoreCoord, dx: int, dy: int):
    nx, ny = c.x + dx, c.y + dy
    if 0 <= nx < dist.px and 0 <= ny < dist.py:
        return CoreCoord(nx, ny)
    return None


def halo_exchange(machine: Machine | None, u: DistVector, k: int, *,
                  charge_halo: bool = True, charge_zero_fill: bool = True,
                  logical=None) -> dict:
    """Fill the cross-core and domain-edge halos of layer k.

    Returns {(coord, ty, tx, side): values} with side in "nswe"; N/S entries
    are 16-element rows for core-boundary tiles, W/E entries are 64-element
    columns for every tile (interior tile columns are filled locally).
    Domain-edge halos are zero-filled. Costs are charged to machine unless
    the respective flag is off.
    """
    dist = u.dist
    if dist is None:
        raise ValueError("halo exchange requires a grid-distributed vector")
    fmt = u.fmt
    w = fmt.byte_width
    if logical is None:
        logical = {
            c: {key: u.tiles[c][dist.tile_index(*key)].to_logical()
                for key in dist.tile_keys() if key[0] == k}
            for c in dist.core_coords()
        }

    halos: dict = {}
    charge = machine is not None and charge_halo
    zf = machine is not None and charge_zero_fill

    # Pass 1: every core sends its boundary slices (row-major core order).
    if charge:
        for c in dist.core_coords():
            for tx in range(dist.mx):
                north = _neighbor(dist, c, 0, -1)
                if north is not None:
                    machine.send(c, north, 16 * w, logical[c][(k, 0, tx)][0, :].copy(), tag=f"halo_s{tx}")
                south = _neighbor(dist, c, 0, 1)
                if south is not None:
                    machine.send(c, south, 16 * w,
                                 logical[c][(k, dist.my - 1, tx)][TILE_ROWS - 1, :].copy(), tag=f"halo_n{tx}")
            for ty in range(dist.my):
                west = _neighbor(dist, c, -1, 0)
                if west is not None:
                    col = logical[c][(k, ty, 0)][:, 0].copy()
                    for s in range(4):  # four discontiguous pieces per side
                        machine.send(c, west, 16 * w, col[16 * s:16 * s + 16], tag=f"halo_e{ty}_{s}")
                east = _neighbor(dist, c, 1, 0)
                if east is not None:
                    col = logical[c][(k, ty, dist.mx - 1)][:, TILE_COLS - 1].copy()
                    for s in range(4):
                        machine.send(c, east, 16 * w, col[16 * s:16 * s + 16], tag=f"halo_w{ty}_{s}")

    # Pass 2: fill halos (receive, local copy, or zero fill).
    for c in dist.core_coords():
        for key in dist.tile_keys():
            kk, ty, tx = key
            if kk != k:
                continue
            # North / South rows: only core-boundary tiles need explicit fill;
            # interior tile rows cross pages via the pointer shift.
            if ty == 0:
                north = _neighbor(dist, c, 0, -1)
                if north is not None:
                    if charge:
                        halos[(c, ty, tx, "n")] = machine.recv(c, north, tag=f"halo_n{tx}")
                    else:
                        halos[(c, ty, tx, "n")] = logical[north][(k, dist.my - 1, tx)][TILE_ROWS - 1, :].copy()
                else:
                    halos[(c, ty, tx, "n")] = np.zeros(16, dtype=fmt.np_dtype)
                    if zf:
                        machine.op_zero_fill(c, 16)
            if ty == dist.my - 1:
                south = _neighbor(dist, c, 0, 1)
                if south is not None:
                    if charge:
                        halos[(c, ty, tx, "s")] = machine.recv(c, south, tag=f"halo_s{tx}")
                    else:
                        halos[(c, ty, tx, "s")] = logical[south][(k, 0, tx)][0, :].copy()
                else:
                    halos[(c, ty, tx, "s")] = np.zeros(16, dtype=fmt.np_dtype)
                    if zf:
                        machine.op_zero_fill(c, 16)
            # West / East columns: every tile needs its 64-element halo.
            if tx > 0:
                halos[(c, ty, tx, "w")] = logical[c][(k, ty, tx - 1)][:, TILE_COLS - 1].copy()
                if charge:
                    machine.charge(c, "copy", 4 * _ceil_div(16 * w, machine.params.dst_copy_bw))
            else:
                west = _neighbor(dist, c, -1, 0)
                if west is not None:
                    if charge:
                        pieces = [machine.recv(c, west, tag=f"halo_w{ty}_{s}") for s in range(4)]
                        halos[(c, ty, tx, "w")] = np.concatenate(pieces)
                    else:
                        halos[(c, ty, tx, "w")] = logical[west][(k, ty, dist.mx - 1)][:, TILE_COLS - 1].copy()
                else:
                    halos[(c, ty, tx, "w")] = np.zeros(TILE_ROWS, dtype=fmt.np_dtype)
                    if zf:
                        machine.op_zero_fill(c, TILE_ROWS)
            if tx < dist.mx - 1:
                halos[(c, ty, tx, "e")] = logical[c][(k, ty, tx + 1)][:, 0].copy()
                if charge:
                    machine.charge(c, "copy", 4 * _ceil_div(16 * w, machine.params.dst_copy_bw))
            else:
                east = _neighbor(dist, c, 1, 0)
                if east is not None:
                    if charge:
                        pieces = [machine.recv(c, east, tag=f"halo_e{ty}_{s}") for s in range(4)]
                        halos[(c, ty, tx, "e")] = np.concatenate(pieces)
                    else:
                        halos[(c, ty, tx, "e")] = logical[east][(k, ty, 0)][:, 0].copy()
                else:
                    halos[(c, ty, tx, "e")] = np.zeros(TILE_ROWS, dtype=fmt.np_dtype)
                    if zf:
                        machine.op_zero_fill(c, TILE_ROWS)
    return halos


# -- stencil application -----------------------------------------------------------------

def stencil_apply(machine: Machine | None, u: DistVector, coeffs: StencilCoeffs,
                  unit: Unit = Unit.FPU, variant: str = "full") -> DistVector:
    """Apply the 7-point stencil to a grid-distributed vector.

    variant selects which overhead components are charged (full, no_halo,
    no_zero_fill, neither); the returned values are identical across
    variants.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown stencil variant: {variant!r}")
    dist = u.dist
    if dist is None:
        raise ValueError("stencil requires a grid-distributed vector")
    fmt = u.fmt
    cf = coeffs.rounded(fmt)
    page = TILE_ELEMS * fmt.byte_width
    charge_halo = variant in ("full", "no_zero_fill")
    charge_zf = variant in ("full", "no_halo")

    out_tiles = {c: [None] * dist.tiles_per_core for c in dist.core_coords()}
    n = TILE_ELEMS

    def ew_charges(c):
        if machine is not None:
            machine.op_transpose(c, n, fmt)
            machine.op_copy(c, n, fmt)
            machine.op_transpose(c, n, fmt)

    for k in range(dist.nz):
        logical = {
            c: {key: u.tiles[c][dist.tile_index(*key)].to_logical()
                for key in dist.tile_keys() if key[0] == k}
            for c in dist.core_coords()
        }
        halos = halo_exchange(machine, u, k, charge_halo=charge_halo,
                              charge_zero_fill=charge_zf, logical=logical)
        for c in dist.core_coords():
            core = machine.core(c) if machine is not None else None
            cbs = []
            for tx in range(dist.mx):
                if core is not None:
                    cb = core.alloc_cb(f"stencil_col_{tx}", page, dist.my)
                else:
                    cb = CircularBuffer(f"stencil_col_{tx}", page, dist.my)
                cb.reserve_back(dist.my)
                for ty in range(dist.my):
                    t = u.tiles[c][dist.tile_index(k, ty, tx)]
                    cb.write_reserved(ty, np.ascontiguousarray(
                        t.data if fmt is not ScalarFmt.BF16
                        else (t.data.view(np.uint32) >> 16).astype(np.uint16)).tobytes())
                cb.push_back(dist.my)
                cbs.append(cb)

            for ty in range(dist.my):
                for tx in range(dist.mx):
                    u_t = u.tiles[c][dist.tile_index(k, ty, tx)]
                    out = tile_scale(cf.center, u_t)
                    if machine is not None:
                        machine.op_eltwise(c, n, unit, fmt)
                    if k > 0:
                        below = u.tiles[c][dist.tile_index(k - 1, ty, tx)]
                        out = tile_eltwise("add", out, tile_scale(cf.below, below))
                        if machine is not None:
                            machine.op_eltwise(c, n, unit, fmt)
                            machine.op_eltwise(c, n, unit, fmt)
                    if k < dist.nz - 1:
                        above = u.tiles[c][dist.tile_index(k + 1, ty, tx)]
                        out = tile_eltwise("add", out, tile_scale(cf.above, above))
                        if machine is not None:
                            machine.op_eltwise(c, n, unit, fmt)
                            machine.op_eltwise(c, n, unit, fmt)

                    vn = shift_tile(cbs[tx], ShiftDir.NORTH, fmt, page_index=ty)
                    if machine is not None:
                        machine.op_copy(c, n, fmt)
                    if ty == 0:
                        vl = vn.to_logical()
                        vl[0, :] = halos[(c, ty, tx, "n")]
                        vn = Tile.from_logical(vl, TileShape.R64x16, fmt, rounded=True)
                    out = tile_eltwise("add", out, tile_scale(cf.north, vn))
                    if machine is not None:
                        machine.op_eltwise(c, n, unit, fmt)
                        machine.op_eltwise(c, n, unit, fmt)

                    vs = shift_tile(cbs[tx], ShiftDir.SOUTH, fmt, page_index=ty)
                    if machine is not None:
                        machine.op_copy(c, n, fmt)
                    if ty == dist.my - 1:
                        vl = vs.to_logical()
                        vl[TILE_ROWS - 1, :] = halos[(c, ty, tx, "s")]
                        vs = Tile.from_logical(vl, TileShape.R64x16, fmt, rounded=True)
                    out = tile_eltwise("add", out, tile_scale(cf.south, vs))
                    if machine is not None:
                        machine.op_eltwise(c, n, unit, fmt)
                        machine.op_eltwise(c, n, unit, fmt)

                    vw = shift_tile_ew(u_t, ShiftDir.WEST, halos[(c, ty, tx, "w")])
                    ew_charges(c)
                    out = tile_eltwise("add", out, tile_scale(cf.west, vw))
                    if machine is not None:
                        machine.op_eltwise(c, n, unit, fmt)
                        machine.op_eltwise(c, n, unit, fmt)

                    ve = shift_tile_ew(u_t, ShiftDir.EAST, halos[(c, ty, tx, "e")])
                    ew_charges(c)
                    out = tile_eltwise("add", out, tile_scale(cf.east, ve))
                    if machine is not None:
                        machine.op_eltwise(c, n, unit, fmt)
                        machine.op_eltwise(c, n, unit, fmt)

                    out_tiles[c][dist.tile_index(k, ty, tx)] = out

            if core is not None:
                for tx in range(dist.mx):
                    del core.cbs[f"stencil_col_{tx}"]

    return DistVector(fmt, out_tiles, dist)


def stencil_bench(width: int, height: int, nz: int, fmt: ScalarFmt, unit: Unit,
                  variant: str, sim_cfg=None, params=None,
                  coeffs: StencilCoeffs | None = None) -> float:
    """Cycles per iteration per tile (mean over cores) for one stencil sweep
    on a width x height core grid with nz tiles per core (m_x = m_y = 1)."""
    from ..device.config import SimConfig

    dist = GridDistribution(nx=16 * width, ny=64 * height, nz=nz, px=width, py=height)
    cfg = (sim_cfg or SimConfig()).with_grid(width, height)
    m = Machine(cfg, params)
    u = DistVector.zeros(dist, fmt)
    stencil_apply(m, u, coeffs or StencilCoeffs.laplacian(), unit, variant)
    total = sum(m.core(c).clock for c in m.coords())
    return total / m.grid.num_cores / dist.tiles_per_core
