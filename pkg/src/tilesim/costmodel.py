"""Cycle accounting and the single-core roofline.

Two distinct notions of cost coexist:

* CostLedger: per-category cycle *accounting* (unpack/compute/pack/copy/noc/
  dram/other). Its total is the sum of categories; sequential kernels add.
* Elapsed cycles: the simulated-time advance of a core's clock for an
  operation, max(compute, movement) under the steady-state overlap assumption,
  plus a fixed per-tile-op dispatch/sync overhead. The overhead is what the
  raw roofline math misses: measured per-iteration solver times are several
  times larger than pure throughput numbers, consistent with circular-buffer
  synchronization and kernel-dispatch gaps on the real machine.

predict_vector_add deliberately excludes the per-op overhead: it reproduces
the measured streaming roofline points (256 tiles/core amortizes dispatch),
with arithmetic intensity 1/6 FLOP/byte on the FPU path and 1/16 on the SFPU
path for 16-bit data (SFPU lane load/store folded into the byte count).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .formats import ScalarFmt

CATEGORIES = ("unpack", "compute", "pack", "copy", "noc", "dram", "other")

TILE_ELEMS = 1024


class Unit(enum.Enum):
    FPU = "fpu"
    SFPU = "sfpu"

    @classmethod
    def parse(cls, name: str) -> "Unit":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown compute unit: {name!r}") from None


@dataclass
class CostParams:
    fpu_eltwise_flops_per_cycle: int = 128
    sfpu_flops_per_cycle_16bit: int = 32
    sfpu_flops_per_cycle_32bit: int = 16
    packer_unpacker_bw: int = 64        # bytes/cycle, shared by unpack+pack
    dst_copy_bw: int = 32               # bytes/cycle
    fpu_reduce_block_per_cycle: int = 1  # 16x16 blocks/cycle
    fpu_matmul_block_per_cycle: int = 1  # (8x16)x(16x16) products/cycle
    # Folded SFPU movement: bytes charged per element-op per byte of width
    # (16 bytes per 16-bit op => 8 bytes per element-byte).
    sfpu_bytes_per_elem_byte: int = 8
    # Fixed dispatch/CB-sync cost per tile-granular operation.
    tile_op_overhead: int = 512
    # Scalar SRAM stores by the control cores (boundary zero fill).
    zero_fill_cycles_per_element: int = 8

    def __post_init__(self):
        for name in (
            "fpu_eltwise_flops_per_cycle", "sfpu_flops_per_cycle_16bit",
            "sfpu_flops_per_cycle_32bit", "packer_unpacker_bw", "dst_copy_bw",
            "fpu_reduce_block_per_cycle", "fpu_matmul_block_per_cycle",
            "sfpu_bytes_per_elem_byte",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"CostParams.{name} must be positive")
        if self.tile_op_overhead < 0 or self.zero_fill_cycles_per_element < 0:
            raise ValueError("CostParams overheads must be non-negative")

    def throughput(self, unit: Unit, fmt: ScalarFmt) -> int:
        """Element ops per cycle."""
        if unit is Unit.FPU:
            if fmt is not ScalarFmt.BF16:
                raise ValueError("FPU restricted to ≤19-bit formats")
            return self.fpu_eltwise_flops_per_cycle
        if fmt is ScalarFmt.BF16:
            return self.sfpu_flops_per_cycle_16bit
        return self.sfpu_flops_per_cycle_32bit


@dataclass
class CostLedger:
    cycles: dict = field(default_factory=lambda: {c: 0 for c in CATEGORIES})
    flops: int = 0
    bytes_moved: int = 0

    def charge(self, category: str, cycles: int):
        self.cycles[category] += int(cycles)

    def total(self) -> int:
        return sum(self.cycles.values())

    def __add__(self, other: "CostLedger") -> "CostLedger":
        out = CostLedger()
        for c in CATEGORIES:
            out.cycles[c] = self.cycles[c] + other.cycles[c]
        out.flops = self.flops + other.flops
        out.bytes_moved = self.bytes_moved + other.bytes_moved
        return out

    def copy(self) -> "CostLedger":
        out = CostLedger()
        out.cycles = dict(self.cycles)
        out.flops = self.flops
        out.bytes_moved = self.bytes_moved
        return out


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def roofline_bound(ai: float, unit: str, params: CostParams | None = None) -> float:
    """min(peak FLOPs/cycle, bandwidth * arithmetic intensity).

    unit is one of "FPU", "SFPU-16", "SFPU-32"; the FPU path is bounded by the
    64 B/cycle pack/unpack bandwidth, the SFPU path by the 32 B/cycle copy
    bandwidth.
    """
    if ai <= 0:
        raise ValueError("arithmetic intensity must be positive")
    p = params or CostParams()
    peaks = {
        "FPU": (p.fpu_eltwise_flops_per_cycle, p.packer_unpacker_bw),
        "SFPU-16": (p.sfpu_flops_per_cycle_16bit, p.dst_copy_bw),
        "SFPU-32": (p.sfpu_flops_per_cycle_32bit, p.dst_copy_bw),
    }
    if unit not in peaks:
        raise ValueError(f"unknown roofline unit: {unit!r}")
    peak, bw = peaks[unit]
    return min(float(peak), bw * ai)


def roofline_table(ais, params: CostParams | None = None):
    """Rows (ai, unit, bound_flops_per_cycle) for CSV export."""
    rows = []
    for unit in ("FPU", "SFPU-16", "SFPU-32"):
        for ai in ais:
            rows.append((ai, unit, roofline_bound(ai, unit, params)))
    return rows


# -- per-operation charging ---------------------------------------------------

def _movement_cycles(n: int, unit: Unit, fmt: ScalarFmt, p: CostParams) -> int:
    w = fmt.byte_width
    if unit is Unit.FPU:
        return _ceil_div(3 * n * w, p.packer_unpacker_bw)
    return _ceil_div(n * p.sfpu_bytes_per_elem_byte * w, p.dst_copy_bw)


def charge_eltwise(ledger: CostLedger, n: int, unit: Unit, fmt: ScalarFmt,
                   params: CostParams | None = None) -> int:
    """Charge one element-wise op over n elements; returns the compute cycles."""
    p = params or CostParams()
    w = fmt.byte_width
    compute = _ceil_div(n, p.throughput(unit, fmt)) if n else 0
    ledger.charge("compute", compute)
    ledger.charge("unpack", _ceil_div(2 * n * w, p.packer_unpacker_bw))
    ledger.charge("pack", _ceil_div(n * w, p.packer_unpacker_bw))
    if unit is Unit.SFPU:
        ledger.charge("copy", _ceil_div(3 * n * w, p.dst_copy_bw))
    ledger.flops += n
    ledger.bytes_moved += 3 * n * w
    return compute


def eltwise_elapsed(n: int, unit: Unit, fmt: ScalarFmt, p: CostParams,
                    overlap_movement: bool = False) -> int:
    """Simulated-time cost of one element-wise tile op.

    overlap_movement models reduction-tree merge adds whose operand staging
    overlaps NoC transit; only the compute term (plus dispatch) remains.
    """
    if n == 0:
        return 0
    compute = _ceil_div(n, p.throughput(unit, fmt))
    if overlap_movement:
        return p.tile_op_overhead + compute
    return p.tile_op_overhead + max(compute, _movement_cycles(n, unit, fmt, p))


def copy_elapsed(n: int, fmt: ScalarFmt, p: CostParams) -> int:
    """Tile copy through the Dst register (32 B/cycle)."""
    return p.tile_op_overhead + _ceil_div(n * fmt.byte_width, p.dst_copy_bw)


def transpose_elapsed(n: int, fmt: ScalarFmt, p: CostParams) -> int:
    """FPU subtile transpose: block-rate compute, pack/unpack movement."""
    compute = _ceil_div(_ceil_div(n, 256), p.fpu_reduce_block_per_cycle)
    movement = _ceil_div(2 * n * fmt.byte_width, p.packer_unpacker_bw)
    return p.tile_op_overhead + max(compute, movement)


def reduce_tile_elapsed(unit: Unit, fmt: ScalarFmt, p: CostParams) -> int:
    """Tile -> scalar reduction. One 16x16 block per cycle on the FPU; the
    SFPU needs a multi-pass shuffle/add sequence, modeled as two full-tile
    element-op sweeps."""
    w = fmt.byte_width
    if unit is Unit.FPU:
        if fmt is not ScalarFmt.BF16:
            raise ValueError("FPU restricted to ≤19-bit formats")
        compute = _ceil_div(4, p.fpu_reduce_block_per_cycle)
        movement = _ceil_div((TILE_ELEMS + 256) * w, p.packer_unpacker_bw)
        return p.tile_op_overhead + max(compute, movement)
    sweeps = 2 * TILE_ELEMS
    compute = _ceil_div(sweeps, p.throughput(unit, fmt))
    movement = _ceil_div(sweeps * p.sfpu_bytes_per_elem_byte * w, p.dst_copy_bw)
    return p.tile_op_overhead + max(compute, movement)


def scalar_op_elapsed(unit: Unit, fmt: ScalarFmt, p: CostParams) -> int:
    return p.tile_op_overhead + 1


def zero_fill_elapsed(n_elements: int, p: CostParams) -> int:
    return n_elements * p.zero_fill_cycles_per_element


def predict_vector_add(n: int, unit: str, params: CostParams | None = None):
    """Full-pipeline cycles and achieved FLOPs/cycle for an n-element add.

    FPU path: BF16, AI = 1/6 FLOP/byte against the 64 B/cycle pack/unpack
    line. SFPU path: AI = 1/16 per 16-bit element (bytes scale with width).
    Returns (cycles, flops_per_cycle).
    """
    p = params or CostParams()
    if n == 0:
        return 0, 0.0
    if unit == "FPU":
        compute = _ceil_div(n, p.fpu_eltwise_flops_per_cycle)
        movement = _ceil_div(6 * n, p.packer_unpacker_bw)
    elif unit in ("SFPU-16", "SFPU-32"):
        tp = p.sfpu_flops_per_cycle_16bit if unit == "SFPU-16" else p.sfpu_flops_per_cycle_32bit
        w = 2 if unit == "SFPU-16" else 4
        compute = _ceil_div(n, tp)
        movement = _ceil_div(n * p.sfpu_bytes_per_elem_byte * w, p.dst_copy_bw)
    else:
        raise ValueError(f"unknown roofline unit: {unit!r}")
    cycles = max(compute, movement)
    return cycles, n / cycles
