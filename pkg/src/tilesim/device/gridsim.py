"""Phase-structured deterministic executor for the kernel library.

Kernels (dot product, stencil, solver) run as explicit per-core phases over a
Machine: every core has a cycle clock and a cost ledger; messages carry the
sender's completion cycle and a receive synchronizes the receiver's clock
(max). All loops iterate cores in row-major order, so values, ledgers and
traces are bit-reproducible. Message queues are FIFO per (src, dst, tag).

This is the same substrate (CBs, NoC costs, SRAM budgets, ledgers, zones) as
run_program's cooperative tasks, organized as bulk-synchronous phases, which
is how the steady-state kernels behave.
"""

from __future__ import annotations

from collections import deque
from contextlib import contextmanager

from ..costmodel import (
    CostParams,
    charge_eltwise,
    copy_elapsed,
    eltwise_elapsed,
    reduce_tile_elapsed,
    scalar_op_elapsed,
    transpose_elapsed,
    zero_fill_elapsed,
    _ceil_div,
)
from ..formats import ScalarFmt
from .config import SimConfig
from .core import CoreGrid, Dram
from .noc import CoreCoord, multicast_cost, unicast_cost
from .sched import TraceZone


class Machine:
    def __init__(self, cfg: SimConfig | None = None, params: CostParams | None = None):
        self.cfg = cfg or SimConfig()
        self.params = params or CostParams()
        self.grid = CoreGrid(self.cfg.grid_width, self.cfg.grid_height,
                             self.cfg.sram_capacity, self.cfg.reserved_overhead)
        self.noc = self.cfg.noc()
        self.dram = Dram(self.cfg.dram_bandwidth)
        self.zones: list[TraceZone] = []
        self._mq: dict[tuple, deque] = {}

    # -- clocks & ledgers ---------------------------------------------------------

    def core(self, coord):
        return self.grid.cores[CoreCoord(*coord)]

    def coords(self):
        return self.grid.coords()

    def charge(self, coord, category: str, cycles: int):
        core = self.core(coord)
        core.ledger.charge(category, cycles)
        core.clock += cycles

    def max_cycles(self) -> int:
        return self.grid.max_clock()

    def mean_cycles(self) -> float:
        clocks = [self.core(c).clock for c in self.coords()]
        return sum(clocks) / len(clocks)

    def barrier(self):
        m = self.grid.max_clock()
        for c in self.coords():
            self.core(c).clock = m

    def global_charge(self, category: str, cycles: int):
        """Barrier, then advance every core (host-side launch/readback stalls)."""
        self.barrier()
        for c in self.coords():
            self.charge(c, category, cycles)

    @contextmanager
    def zone(self, coord, task: str, label: str):
        core = self.core(coord)
        start = core.clock
        yield
        self.zones.append(TraceZone(CoreCoord(*coord), task, label, start, core.clock))

    # -- charged tile operations ----------------------------------------------------

    def op_eltwise(self, coord, n: int, unit, fmt: ScalarFmt, overlap_movement=False):
        core = self.core(coord)
        charge_eltwise(core.ledger, n, unit, fmt, self.params)
        core.ledger.charge("other", self.params.tile_op_overhead)
        core.clock += eltwise_elapsed(n, unit, fmt, self.params, overlap_movement)

    def op_copy(self, coord, n: int, fmt: ScalarFmt):
        core = self.core(coord)
        w = fmt.byte_width
        core.ledger.charge("copy", _ceil_div(n * w, self.params.dst_copy_bw))
        core.ledger.charge("other", self.params.tile_op_overhead)
        core.ledger.bytes_moved += 2 * n * w
        core.clock += copy_elapsed(n, fmt, self.params)

    def op_transpose(self, coord, n: int, fmt: ScalarFmt):
        core = self.core(coord)
        w = fmt.byte_width
        core.ledger.charge("compute", _ceil_div(n, 256))
        core.ledger.charge("unpack", _ceil_div(n * w, self.params.packer_unpacker_bw))
        core.ledger.charge("pack", _ceil_div(n * w, self.params.packer_unpacker_bw))
        core.ledger.charge("other", self.params.tile_op_overhead)
        core.ledger.bytes_moved += 2 * n * w
        core.clock += transpose_elapsed(n, fmt, self.params)

    def op_reduce_tile(self, coord, unit, fmt: ScalarFmt):
        core = self.core(coord)
        elapsed = reduce_tile_elapsed(unit, fmt, self.params)
        core.ledger.charge("compute", elapsed - self.params.tile_op_overhead)
        core.ledger.charge("other", self.params.tile_op_overhead)
        core.ledger.flops += 1024
        core.clock += elapsed

    def op_scalar(self, coord, unit, fmt: ScalarFmt):
        core = self.core(coord)
        core.ledger.charge("compute", 1)
        core.ledger.charge("other", self.params.tile_op_overhead)
        core.ledger.flops += 1
        core.clock += scalar_op_elapsed(unit, fmt, self.params)

    def op_zero_fill(self, coord, n_elements: int):
        core = self.core(coord)
        cycles = zero_fill_elapsed(n_elements, self.params)
        core.ledger.charge("other", cycles)
        core.clock += cycles

    # -- messaging --------------------------------------------------------------------

    def send(self, src, dst, nbytes: int, payload=None, tag: str = ""):
        """Charge the sender for a unicast and enqueue (FIFO per src/dst/tag)."""
        src = CoreCoord(*src)
        dst = CoreCoord(*dst)
        cost = unicast_cost(self.noc, src, dst, nbytes, self.grid.width, self.grid.height)
        self.charge(src, "noc", cost)
        self.core(src).ledger.bytes_moved += nbytes
        self._mq.setdefault((src, dst, tag), deque()).append((self.core(src).clock, payload))

    def recv(self, dst, src, tag: str = ""):
        """Dequeue in FIFO order; the receiver's clock advances to the arrival."""
        src = CoreCoord(*src)
        dst = CoreCoord(*dst)
        arrival, payload = self._mq[(src, dst, tag)].popleft()
        core = self.core(dst)
        core.clock = max(core.clock, arrival)
        return payload

    def multicast(self, root, nbytes: int, payload=None):
        """Root pays the tree cost; every core synchronizes to the arrival."""
        root = CoreCoord(*root)
        rect = list(self.coords())
        cost = multicast_cost(self.noc, root, rect, nbytes, self.grid.width, self.grid.height)
        self.charge(root, "noc", cost)
        arrival = self.core(root).clock
        for c in rect:
            core = self.core(c)
            core.clock = max(core.clock, arrival)
        return payload
