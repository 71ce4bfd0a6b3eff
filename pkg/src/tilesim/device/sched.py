"""Deterministic cooperative scheduler for per-core kernel task triples.

Each core runs up to three tasks (reader, compute, writer) written as Python
generators over a TaskCtx. Tasks yield only when a circular-buffer operation
cannot proceed; the scheduler steps tasks in a fixed order (cores row-major,
reader -> compute -> writer), so runs are bit-reproducible. Simulated time is
virtual: every task owns a cycle clock advanced by explicit charges, and CB
handoffs synchronize clocks through page timestamps (a consumer waking on a
page pushed at cycle T advances to at least T; a producer reusing a slot
freed at cycle T likewise).

Deadlock (all unfinished tasks blocked on CBs, no progress possible) raises
DeadlockError naming the blocked circular buffers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..costmodel import CostLedger
from .cbuf import CircularBuffer
from .core import CoreGrid
from .noc import CoreCoord, NoCConfig, multicast_cost, unicast_cost

TASK_ORDER = ("reader", "compute", "writer")


class DeadlockError(Exception):
    pass


@dataclass
class TraceZone:
    core: CoreCoord
    task: str
    label: str
    start_cycle: int
    end_cycle: int

    def as_record(self) -> dict:
        return {
            "core_x": self.core.x,
            "core_y": self.core.y,
            "task": self.task,
            "label": self.label,
            "start_cycle": self.start_cycle,
            "end_cycle": self.end_cycle,
        }


@dataclass
class RunResult:
    outputs: dict
    cycles: int
    ledger: CostLedger
    zones: list
    per_core_cycles: dict


class TaskCtx:
    """Capabilities handed to a task generator."""

    def __init__(self, sched: "_Scheduler", coord: CoreCoord, task: str):
        self._sched = sched
        self.coord = coord
        self.task = task
        self.clock = 0
        self._zone_stack = []

    # -- bookkeeping ------------------------------------------------------------

    def _core(self, coord=None):
        return self._sched.grid.cores[coord or self.coord]

    def _cb(self, name: str, coord=None) -> CircularBuffer:
        core = self._core(coord)
        try:
            return core.cbs[name]
        except KeyError:
            raise KeyError(f"core {tuple(core.coord)} has no CB named '{name}'") from None

    def charge(self, category: str, cycles: int):
        self.clock += cycles
        self._core().ledger.charge(category, cycles)

    def emit(self, key, value):
        self._sched.outputs[key] = value

    # -- circular-buffer operations (blocking ones are generators) ---------------

    def cb_reserve_back(self, name: str, n: int):
        cb = self._cb(name)
        while not cb.can_reserve(n):
            yield ("reserve_back", self.coord, name, n)
        self.clock = max(self.clock, cb.reserve_back(n))
        self._sched.progress += 1

    def cb_write(self, name: str, i: int, data: bytes):
        self._cb(name).write_reserved(i, data)

    def cb_push_back(self, name: str, n: int):
        self._cb(name).push_back(n, self.clock)
        self._sched.progress += 1

    def cb_wait_front(self, name: str, n: int):
        cb = self._cb(name)
        while not cb.can_wait(n):
            yield ("wait_front", self.coord, name, n)
        self.clock = max(self.clock, cb.wait_front(n))
        self._sched.progress += 1

    def cb_read(self, name: str, i: int = 0) -> bytes:
        return self._cb(name).peek(i)

    def cb_pop_front(self, name: str, n: int):
        self._cb(name).pop_front(n, self.clock)
        self._sched.progress += 1

    def cb_offset_read_ptr(self, name: str, delta: int):
        self._cb(name).offset_read_ptr(delta)

    # -- NoC ----------------------------------------------------------------------

    def noc_send(self, dst, cb_name: str, data: bytes):
        """Deliver one page into a CB on another core (blocks on remote space)."""
        dst = CoreCoord(*dst)
        cb = self._cb(cb_name, dst)
        while not cb.can_reserve(1):
            yield ("noc_send", self.coord, f"{cb_name}@{tuple(dst)}", 1)
        cb.reserve_back(1)
        cost = unicast_cost(self._sched.noc, self.coord, dst, len(data),
                            self._sched.grid.width, self._sched.grid.height)
        self.charge("noc", cost)
        cb.write_reserved(0, data)
        cb.push_back(1, self.clock)
        self._sched.progress += 1

    def noc_multicast(self, rect, cb_name: str, data: bytes):
        rect = [CoreCoord(*c) for c in rect]
        cbs = [self._cb(cb_name, c) for c in rect]
        while not all(cb.can_reserve(1) for cb in cbs):
            yield ("noc_multicast", self.coord, cb_name, 1)
        cost = multicast_cost(self._sched.noc, self.coord, rect, len(data),
                              self._sched.grid.width, self._sched.grid.height)
        self.charge("noc", cost)
        for cb in cbs:
            cb.reserve_back(1)
            cb.write_reserved(0, data)
            cb.push_back(1, self.clock)
        self._sched.progress += 1

    # -- tracing --------------------------------------------------------------------

    def zone_begin(self, label: str):
        self._zone_stack.append((label, self.clock))

    def zone_end(self):
        label, start = self._zone_stack.pop()
        self._sched.zones.append(TraceZone(self.coord, self.task, label, start, self.clock))


@dataclass
class _Task:
    ctx: TaskCtx
    gen: object
    done: bool = False
    blocked: tuple | None = None


class _Scheduler:
    def __init__(self, grid: CoreGrid, noc: NoCConfig):
        self.grid = grid
        self.noc = noc
        self.outputs = {}
        self.zones = []
        self.progress = 0


def run_program(grid: CoreGrid, programs: dict, noc: NoCConfig | None = None) -> RunResult:
    """Run per-core task triples to completion under the deterministic
    cooperative schedule.

    programs: {coord: {"reader"|"compute"|"writer": factory}} where factory
    takes a TaskCtx and returns a generator (or None for no-op tasks).
    """
    sched = _Scheduler(grid, noc or NoCConfig())
    tasks: list[_Task] = []
    for coord in grid.coords():
        per_core = programs.get(coord) or programs.get(tuple(coord))
        if not per_core:
            continue
        for name in TASK_ORDER:
            factory = per_core.get(name)
            if factory is None:
                continue
            ctx = TaskCtx(sched, coord, name)
            gen = factory(ctx)
            if gen is not None:
                tasks.append(_Task(ctx, gen))

    pending = [t for t in tasks if not t.done]
    while pending:
        made_progress = False
        before = sched.progress
        for t in pending:
            try:
                t.blocked = next(t.gen)
            except StopIteration:
                t.done = True
                t.blocked = None
                made_progress = True
        if sched.progress != before:
            made_progress = True
        pending = [t for t in tasks if not t.done]
        if pending and not made_progress:
            blocked = ", ".join(
                f"core{tuple(t.ctx.coord)}.{t.ctx.task} blocked on CB '{t.blocked[2]}' "
                f"({t.blocked[0]} {t.blocked[3]})"
                for t in pending if t.blocked
            )
            raise DeadlockError(f"deadlock: {blocked or 'tasks blocked with no runnable work'}")

    per_core_cycles = {}
    for t in tasks:
        core = grid.cores[t.ctx.coord]
        core.clock = max(core.clock, t.ctx.clock)
        per_core_cycles[t.ctx.coord] = max(per_core_cycles.get(t.ctx.coord, 0), t.ctx.clock)

    return RunResult(
        outputs=sched.outputs,
        cycles=max(per_core_cycles.values(), default=0),
        ledger=grid.aggregate_ledger(),
        zones=sched.zones,
        per_core_cycles=per_core_cycles,
    )
