"""Distributed element-wise vector operations (no NoC traffic)."""

from __future__ import annotations

from ..costmodel import TILE_ELEMS, Unit
from ..device.gridsim import Machine
from ..formats import ScalarFmt
from ..tile import Tile, tile_axpy, tile_eltwise, tile_scale
from .distvec import DistVector


def dist_axpy(machine: Machine | None, alpha: float, x: DistVector, y: DistVector,
              unit: Unit = Unit.FPU) -> DistVector:
    """out = alpha*x + y per element: round(round(alpha*x_e) + y_e).

    Charged as one multiply plus one add per tile.
    """
    x.check_layout(y)
    out = {}
    for c in x.coords:
        tiles = []
        for tx, ty in zip(x.tiles[c], y.tiles[c]):
            tiles.append(tile_axpy(alpha, tx, ty))
            if machine is not None:
                machine.op_eltwise(c, TILE_ELEMS, unit, x.fmt)
                machine.op_eltwise(c, TILE_ELEMS, unit, x.fmt)
        out[c] = tiles
    return DistVector(x.fmt, out, x.dist)


def dist_eltwise(machine: Machine | None, op: str, x: DistVector, y: DistVector,
                 unit: Unit = Unit.FPU) -> DistVector:
    x.check_layout(y)
    out = {}
    for c in x.coords:
        tiles = []
        for tx, ty in zip(x.tiles[c], y.tiles[c]):
            tiles.append(tile_eltwise(op, tx, ty))
            if machine is not None:
                machine.op_eltwise(c, TILE_ELEMS, unit, x.fmt)
        out[c] = tiles
    return DistVector(x.fmt, out, x.dist)


def dist_scale(machine: Machine | None, alpha: float, x: DistVector,
               unit: Unit = Unit.FPU) -> DistVector:
    out = {}
    for c in x.coords:
        tiles = []
        for t in x.tiles[c]:
            tiles.append(tile_scale(alpha, t))
            if machine is not None:
                machine.op_eltwise(c, TILE_ELEMS, unit, x.fmt)
        out[c] = tiles
    return DistVector(x.fmt, out, x.dist)
