"""Global dot product over the core grid.

Every core multiplies its tile pairs elementwise and folds them into one
partial tile (ascending tile order). The partials are then reduced across
the grid:

granularity:
  SCALAR_FIRST (method 1): each core reduces its partial tile to a scalar,
    scalars travel the routing pattern, one FTZ add per hop.
  TILE_TO_ROOT (method 2): whole tiles travel, tile-added per hop; only the
    root reduces to a scalar.

routing:
  NAIVE:  every core sends west along its row; column 0 then sends north;
    root is (0, 0). Each core handles at most two incoming partials.
  CENTER: rows fold toward the center column from both ends (east side first,
    then west), then the center column folds toward the center core (south
    side first, then north). Root is (W//2, H//2).
  DIRECT: every core sends straight to the root, which folds incoming
    partials in row-major source order (implemented for completeness; the
    root is the obvious bottleneck and it is excluded from benchmarks).

At every merge the receiver folds the incoming partial into its own
accumulator: acc = ftz_add(acc, incoming). The scalar result is multicast
from the root so every core ends holding it.

Merge adds on the routing path are charged compute-only (operand staging
overlaps NoC transit in the steady dataflow); local compute is charged with
full movement.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from ..costmodel import TILE_ELEMS, Unit
from ..device.gridsim import Machine
from ..device.noc import CoreCoord
from ..formats import ScalarFmt, ftz_add
from ..tile import Tile, tile_eltwise, tile_reduce_sum
from .distvec import DistVector

SCALAR_MSG_BYTES = 16  # one scalar padded to the NoC write alignment


class Granularity(enum.Enum):
    SCALAR_FIRST = "scalar"
    TILE_TO_ROOT = "tile"

    @classmethod
    def parse(cls, name: str) -> "Granularity":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown reduction granularity: {name!r}") from None


class Routing(enum.Enum):
    NAIVE = "naive"
    CENTER = "center"
    DIRECT = "direct"

    @classmethod
    def parse(cls, name: str) -> "Routing":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown routing pattern: {name!r}") from None


@dataclass(frozen=True)
class ReductionConfig:
    granularity: Granularity = Granularity.SCALAR_FIRST
    routing: Routing = Routing.NAIVE


def local_dot_partial(machine: Machine | None, coord, x_tiles, y_tiles,
                      unit: Unit, fmt: ScalarFmt) -> Tile:
    """partial = sum over tiles of x_i * y_i, folded in ascending tile order."""
    if len(x_tiles) != len(y_tiles):
        raise ValueError("tile count mismatch")
    partial = tile_eltwise("mul", x_tiles[0], y_tiles[0])
    if machine is not None:
        machine.op_eltwise(coord, TILE_ELEMS, unit, fmt)
    for xt, yt in zip(x_tiles[1:], y_tiles[1:]):
        prod = tile_eltwise("mul", xt, yt)
        partial = tile_eltwise("add", partial, prod)
        if machine is not None:
            machine.op_eltwise(coord, TILE_ELEMS, unit, fmt)
            machine.op_eltwise(coord, TILE_ELEMS, unit, fmt)
    return partial


def _route_hops(w: int, h: int, routing: Routing):
    """Ordered (src, dst) hops; every core's accumulator is eventually folded
    into the root's. The emission order below IS the merge order."""
    hops = []
    if routing is Routing.NAIVE:
        root = CoreCoord(0, 0)
        for y in range(h):
            for x in range(w - 1, 0, -1):
                hops.append((CoreCoord(x, y), CoreCoord(x - 1, y)))
        for y in range(h - 1, 0, -1):
            hops.append((CoreCoord(0, y), CoreCoord(0, y - 1)))
    elif routing is Routing.CENTER:
        cx, cy = w // 2, h // 2
        root = CoreCoord(cx, cy)
        for y in range(h):
            for x in range(w - 1, cx, -1):  # east side first
                hops.append((CoreCoord(x, y), CoreCoord(x - 1, y)))
            for x in range(0, cx):          # then west side
                hops.append((CoreCoord(x, y), CoreCoord(x + 1, y)))
        for y in range(h - 1, cy, -1):      # south side first
            hops.append((CoreCoord(cx, y), CoreCoord(cx, y - 1)))
        for y in range(0, cy):              # then north side
            hops.append((CoreCoord(cx, y), CoreCoord(cx, y + 1)))
    elif routing is Routing.DIRECT:
        root = CoreCoord(0, 0)
        for y in range(h):
            for x in range(w):
                if (x, y) != (0, 0):
                    hops.append((CoreCoord(x, y), root))
    else:
        raise ValueError(routing)
    return root, hops


def _grid_wh(machine: Machine | None, x: DistVector):
    if machine is not None:
        return machine.grid.width, machine.grid.height
    if x.dist is not None:
        return x.dist.px, x.dist.py
    w = max(c.x for c in x.coords) + 1
    h = max(c.y for c in x.coords) + 1
    return w, h


def global_dot(machine: Machine | None, x: DistVector, y: DistVector,
               cfg: ReductionConfig, unit: Unit) -> float:
    """Distributed dot product; the returned scalar is held by every core.

    machine=None computes values only (identical merge order, no charges);
    this is the solver's shadow-mode path.
    """
    x.check_layout(y)
    fmt = x.fmt
    w, h = _grid_wh(machine, x)
    coords = list(x.tiles.keys())
    if machine is not None and set(coords) != set(machine.coords()):
        raise ValueError("vector does not cover the machine's core grid")

    acc_tiles = {}
    for c in coords:
        if machine is None:
            acc_tiles[c] = local_dot_partial(None, c, x.tiles[c], y.tiles[c], unit, fmt)
        else:
            with machine.zone(c, "compute", "dot.local"):
                acc_tiles[c] = local_dot_partial(machine, c, x.tiles[c], y.tiles[c], unit, fmt)

    scalar_mode = cfg.granularity is Granularity.SCALAR_FIRST
    if scalar_mode:
        acc = {}
        for c in coords:
            acc[c] = tile_reduce_sum(acc_tiles[c])
            if machine is not None:
                with machine.zone(c, "compute", "dot.reduce"):
                    machine.op_reduce_tile(c, unit, fmt)
    else:
        acc = acc_tiles

    root, hops = _route_hops(w, h, cfg.routing)
    nbytes = SCALAR_MSG_BYTES if scalar_mode else TILE_ELEMS * fmt.byte_width
    for src, dst in hops:
        if machine is not None:
            with machine.zone(src, "writer", "dot.send"):
                machine.send(src, dst, nbytes, acc[src], tag="dot")
            incoming = machine.recv(dst, src, tag="dot")
        else:
            incoming = acc[src]
        if scalar_mode:
            acc[dst] = ftz_add(acc[dst], incoming, fmt)
            if machine is not None:
                with machine.zone(dst, "compute", "dot.merge"):
                    machine.op_scalar(dst, unit, fmt)
        else:
            acc[dst] = tile_eltwise("add", acc[dst], incoming)
            if machine is not None:
                with machine.zone(dst, "compute", "dot.merge"):
                    machine.op_eltwise(dst, TILE_ELEMS, unit, fmt, overlap_movement=True)

    if scalar_mode:
        result = acc[root]
    else:
        result = tile_reduce_sum(acc[root])
        if machine is not None:
            with machine.zone(root, "compute", "dot.reduce"):
                machine.op_reduce_tile(root, unit, fmt)

    if machine is not None:
        machine.multicast(root, SCALAR_MSG_BYTES, result)
    return result


def predict_reduction_speedup(width: int, height: int, tiles_per_core: int,
                              fmt: ScalarFmt = ScalarFmt.FP32,
                              unit: Unit = Unit.SFPU,
                              granularity: Granularity = Granularity.TILE_TO_ROOT,
                              sim_cfg=None, params=None) -> float:
    """Percent speedup of the center routing over the naive routing for the
    global dot product, from simulated cycles (critical path)."""
    from ..device.config import SimConfig

    cycles = {}
    for routing in (Routing.NAIVE, Routing.CENTER):
        cfg = (sim_cfg or SimConfig()).with_grid(width, height)
        m = Machine(cfg, params)
        coords = list(m.coords())
        x = DistVector.block(coords, tiles_per_core, fmt, fill=0.0)
        global_dot(m, x, x, ReductionConfig(granularity, routing), unit)
        cycles[routing] = m.max_cycles()
    return (cycles[Routing.NAIVE] / cycles[Routing.CENTER] - 1.0) * 100.0
