"""Cores, grids and the DRAM endpoint."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..costmodel import CostLedger
from .cbuf import CircularBuffer
from .noc import CoreCoord

MAX_GRID_W = 8
MAX_GRID_H = 7

DEFAULT_SRAM_CAPACITY = 1_572_864
DEFAULT_RESERVED_OVERHEAD = 180_224


class ConfigError(Exception):
    """Invalid configuration; maps to CLI exit code 2."""


@dataclass
class TensixCore:
    coord: CoreCoord
    sram_capacity: int = DEFAULT_SRAM_CAPACITY
    reserved_overhead: int = DEFAULT_RESERVED_OVERHEAD
    cbs: dict = field(default_factory=dict)
    ledger: CostLedger = field(default_factory=CostLedger)
    clock: int = 0

    @property
    def cb_budget(self) -> int:
        return self.sram_capacity - self.reserved_overhead

    def cb_bytes_allocated(self) -> int:
        return sum(cb.total_bytes() for cb in self.cbs.values())

    def alloc_cb(self, name: str, page_size: int, capacity: int) -> CircularBuffer:
        """Allocate a named CB; rejected at configuration time if it would
        exceed the SRAM budget."""
        if name in self.cbs:
            raise ConfigError(f"CB '{name}' already allocated on core {tuple(self.coord)}")
        need = page_size * capacity
        have = self.cb_budget - self.cb_bytes_allocated()
        if need > have:
            raise ConfigError(
                f"CB allocation exceeds SRAM capacity on core {tuple(self.coord)}: "
                f"need {need} bytes, {have} available "
                f"(capacity {self.sram_capacity} - reserved {self.reserved_overhead})"
            )
        cb = CircularBuffer(name, page_size, capacity)
        self.cbs[name] = cb
        return cb

    def free_cbs(self):
        self.cbs.clear()


class CoreGrid:
    """A width x height rectangle of compute cores (max 8x7)."""

    def __init__(self, width: int, height: int,
                 sram_capacity: int = DEFAULT_SRAM_CAPACITY,
                 reserved_overhead: int = DEFAULT_RESERVED_OVERHEAD):
        if not (1 <= width <= MAX_GRID_W and 1 <= height <= MAX_GRID_H):
            raise ConfigError(
                f"core grid {width}x{height} outside the {MAX_GRID_W}x{MAX_GRID_H} compute sub-grid"
            )
        self.width = width
        self.height = height
        self.cores = {
            CoreCoord(x, y): TensixCore(CoreCoord(x, y), sram_capacity, reserved_overhead)
            for y in range(height) for x in range(width)
        }

    def core(self, coord) -> TensixCore:
        return self.cores[CoreCoord(*coord)]

    def coords(self):
        """Row-major iteration order; the deterministic scheduling order."""
        for y in range(self.height):
            for x in range(self.width):
                yield CoreCoord(x, y)

    @property
    def num_cores(self) -> int:
        return self.width * self.height

    def aggregate_ledger(self) -> CostLedger:
        total = CostLedger()
        for c in self.coords():
            total = total + self.cores[c].ledger
        return total

    def max_clock(self) -> int:
        return max((self.cores[c].clock for c in self.coords()), default=0)


class Dram:
    """Single aggregate endpoint per grid; requests serialize on one timeline.

    Reads must be 32B aligned (offset and length), writes 16B aligned.
    """

    def __init__(self, bandwidth: int = 64):
        if bandwidth <= 0:
            raise ConfigError("DRAM bandwidth must be positive")
        self.bandwidth = bandwidth
        self.clock = 0
        self.buffers: dict[str, bytearray] = {}

    def alloc(self, name: str, nbytes: int):
        self.buffers[name] = bytearray(nbytes)

    def _xfer_cycles(self, nbytes: int) -> int:
        return math.ceil(nbytes / self.bandwidth)

    def read(self, name: str, offset: int, nbytes: int, at_cycle: int) -> tuple[bytes, int]:
        """Returns (data, completion_cycle)."""
        if offset % 32 or nbytes % 32:
            raise ValueError("DRAM reads must be 32B aligned")
        buf = self.buffers[name]
        self.clock = max(self.clock, at_cycle) + self._xfer_cycles(nbytes)
        return bytes(buf[offset:offset + nbytes]), self.clock

    def write(self, name: str, offset: int, data: bytes, at_cycle: int) -> int:
        if offset % 16 or len(data) % 16:
            raise ValueError("DRAM writes must be 16B aligned")
        buf = self.buffers[name]
        buf[offset:offset + len(data)] = data
        self.clock = max(self.clock, at_cycle) + self._xfer_cycles(len(data))
        return self.clock
