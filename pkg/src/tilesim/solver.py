"""Preconditioned conjugate gradient on the distributed 7-point stencil.

Two execution modes share one compute path (iterates are bit-identical):

* FUSED (the BF16/FPU default): the whole solve is one device program; the
  residual scalar stays in SRAM. Four vector-sized buffer sets are resident
  (x, r, p, q; the Jacobi solve is a scalar scale folded into the updates),
  plus 24 scratch pages for shifts and staging.
* SPLIT (the FP32/SFPU default): one kernel per primitive with host
  round-trips; z is materialized between kernels, so five vector sets plus
  20 scratch pages are resident, and every iteration pays per-kernel launch
  overhead plus one device-to-host residual readback.

With the default SRAM budget (1,572,864 B minus 180,224 B reserved) the
plans admit exactly 164 BF16 tiles per core fused and 64 FP32 tiles per core
split.

Convergence uses the ABSOLUTE residual 2-norm (flush-to-zero makes relative
residuals treacherous); sqrt is evaluated in full precision then rounded to
the working format. The double-precision shadow mode runs the same code with
plain IEEE doubles, no flushing, and no cost model.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .costmodel import Unit
from .device.core import ConfigError, DEFAULT_RESERVED_OVERHEAD, DEFAULT_SRAM_CAPACITY
from .device.gridsim import Machine
from .formats import ScalarFmt, ftz_div, scalar_from_f64
from .kernels.distvec import DistVector, GridDistribution
from .kernels.dot import ReductionConfig, global_dot
from .kernels.stencil import StencilCoeffs, stencil_apply
from .kernels.vecops import dist_axpy, dist_eltwise, dist_scale
from .tile import TILE_ELEMS


class Mode(enum.Enum):
    FUSED = "fused"
    SPLIT = "split"

    @classmethod
    def parse(cls, name: str) -> "Mode":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown solver mode: {name!r}") from None


class CGBreakdownError(Exception):
    def __init__(self, iteration: int, what: str):
        self.iteration = iteration
        super().__init__(f"CG breakdown at iteration {iteration}: {what}")


# SRAM residency plans (vector-sized CB sets + scratch pages).
_PLAN = {Mode.FUSED: (4, 24), Mode.SPLIT: (5, 20)}

# Kernel launches per iteration in split mode: spmv, four dots (lines 6, 7,
# 10, 13), three vector updates (x, r, p) and the Jacobi scale.
_SPLIT_LAUNCHES_PER_ITER = 9


@dataclass
class PCGConfig:
    epsilon: float
    max_iters: int = 1000
    fmt: ScalarFmt = ScalarFmt.FP32
    mode: Mode | None = None
    unit: Unit | None = None
    reduction: ReductionConfig = field(default_factory=ReductionConfig)
    coeffs: StencilCoeffs = field(default_factory=StencilCoeffs.laplacian)
    shadow_f64: bool = False
    launch_overhead_cycles: int = 2000
    readback_cycles: int = 5000

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be positive")
        if not self.fmt.is_device_fmt and not self.shadow_f64:
            raise ConfigError("F64 is only available in shadow mode")
        if self.mode is None:
            self.mode = Mode.FUSED if self.fmt is ScalarFmt.BF16 else Mode.SPLIT
        if self.unit is None:
            self.unit = Unit.FPU if self.fmt is ScalarFmt.BF16 else Unit.SFPU
        if self.unit is Unit.FPU and self.fmt is ScalarFmt.FP32:
            raise ConfigError("FPU restricted to ≤19-bit formats")


@dataclass
class PCGState:
    x: DistVector
    r: DistVector
    z: DistVector
    p: DistVector
    q: DistVector | None
    delta: float
    alpha: float
    beta: float
    iter: int
    residual_history: list


@dataclass
class PCGResult:
    x: DistVector
    state: PCGState
    converged: bool
    iterations: int
    residual_history: list
    cycles_total: int
    cycles_per_iter: list  # cumulative max-cycles after each iteration
    report_rows: list      # (iter, residual_norm, cumulative_cycles)


def required_cb_bytes(fmt: ScalarFmt, mode: Mode, tiles_per_core: int) -> int:
    vectors, scratch = _PLAN[mode]
    page = TILE_ELEMS * fmt.byte_width
    return (vectors * tiles_per_core + scratch) * page


def max_tiles_per_core(fmt: ScalarFmt, mode: Mode,
                       sram_capacity: int = DEFAULT_SRAM_CAPACITY,
                       reserved_overhead: int = DEFAULT_RESERVED_OVERHEAD) -> int:
    vectors, scratch = _PLAN[mode]
    page = TILE_ELEMS * fmt.byte_width
    return ((sram_capacity - reserved_overhead) // page - scratch) // vectors


def validate_capacity(fmt: ScalarFmt, mode: Mode, tiles_per_core: int,
                      sram_capacity: int = DEFAULT_SRAM_CAPACITY,
                      reserved_overhead: int = DEFAULT_RESERVED_OVERHEAD):
    """Reject over-budget solves at configuration time, never mid-run."""
    need = required_cb_bytes(fmt, mode, tiles_per_core)
    budget = sram_capacity - reserved_overhead
    if need > budget:
        raise ConfigError(
            f"solver buffers exceed SRAM capacity: {tiles_per_core} tiles/core in "
            f"{fmt.value}/{mode.value} needs {need} B of CBs, budget is {budget} B "
            f"(max {max_tiles_per_core(fmt, mode, sram_capacity, reserved_overhead)} tiles/core)"
        )


def spmv(machine: Machine | None, p: DistVector,
         coeffs: StencilCoeffs | None = None, unit: Unit = Unit.FPU) -> DistVector:
    """q = A p; A is never materialized, it is the 7 stencil coefficients."""
    return stencil_apply(machine, p, coeffs or StencilCoeffs.laplacian(), unit)


def jacobi_apply(machine: Machine | None, r: DistVector,
                 coeffs: StencilCoeffs | None = None, unit: Unit = Unit.FPU) -> DistVector:
    """z = M^-1 r with M = diag(A): elementwise scale by 1/center."""
    center = (coeffs or StencilCoeffs.laplacian()).center
    inv = scalar_from_f64(1.0 / center, r.fmt)
    return dist_scale(machine, inv, r, unit)


def pcg_solve(machine: Machine | None, b: DistVector, x0: DistVector | None,
              cfg: PCGConfig) -> PCGResult:
    dist = b.dist
    if dist is None:
        raise ConfigError("pcg_solve requires a grid-distributed right-hand side")
    fmt = b.fmt
    if cfg.shadow_f64:
        if fmt is not ScalarFmt.F64:
            raise ConfigError("shadow mode expects F64 vectors")
    else:
        if fmt is not cfg.fmt:
            raise ConfigError(f"vector format {fmt.value} does not match config {cfg.fmt.value}")
        sram = machine.cfg.sram_capacity if machine is not None else DEFAULT_SRAM_CAPACITY
        resv = machine.cfg.reserved_overhead if machine is not None else DEFAULT_RESERVED_OVERHEAD
        validate_capacity(fmt, cfg.mode, dist.tiles_per_core, sram, resv)
    unit = cfg.unit
    coeffs = cfg.coeffs
    split = machine is not None and cfg.mode is Mode.SPLIT

    def launch():
        if split:
            machine.global_charge("other", cfg.launch_overhead_cycles)

    def dot(u, v):
        launch()
        return global_dot(machine, u, v, cfg.reduction, unit)

    def norm_of(rr: float) -> float:
        return scalar_from_f64(math.sqrt(rr) if rr > 0 else 0.0, fmt)

    if x0 is None:
        x = DistVector.zeros(dist, fmt)
    else:
        x0.check_layout(b)
        x = x0.copy()

    cycle_marks = []

    def mark():
        cycle_marks.append(machine.max_cycles() if machine is not None else 0)

    # r0 = b - A x0; z0 = M^-1 r0; p0 = z0
    launch()
    q = stencil_apply(machine, x, coeffs, unit)
    launch()
    r = dist_eltwise(machine, "sub", b, q, unit)
    launch()
    z = jacobi_apply(machine, r, coeffs, unit)
    p = z.copy()

    norm = norm_of(dot(r, r))
    history = [norm]
    alpha = beta = 0.0
    delta = 0.0
    mark()

    if norm <= cfg.epsilon:
        state = PCGState(x, r, z, p, None, delta, alpha, beta, 0, history)
        rows = [(0, history[0], cycle_marks[-1])]
        return PCGResult(x, state, True, 0, history,
                         cycle_marks[-1], cycle_marks, rows)

    converged = False
    it = 0
    q = None
    rows = [(0, history[0], cycle_marks[-1])]
    while it < cfg.max_iters:
        it += 1
        launch()
        q = stencil_apply(machine, p, coeffs, unit)          # line 5
        delta = dot(r, z)                                    # line 6
        pq = dot(p, q)                                       # line 7
        if pq == 0.0 or math.isnan(pq):
            raise CGBreakdownError(it, "p^T q is zero")
        alpha = ftz_div(delta, pq, fmt)
        launch()
        x = dist_axpy(machine, alpha, p, x, unit)            # line 8
        launch()
        r = dist_axpy(machine, scalar_from_f64(-alpha, fmt), q, r, unit)  # line 9
        norm = norm_of(dot(r, r))                            # line 10
        history.append(norm)
        if split:
            machine.global_charge("dram", cfg.readback_cycles)
        mark()
        rows.append((it, norm, cycle_marks[-1]))
        if norm <= cfg.epsilon:
            converged = True
            break
        launch()
        z = jacobi_apply(machine, r, coeffs, unit)           # line 12
        delta_next = dot(r, z)                               # line 13
        if delta == 0.0 or math.isnan(delta):
            raise CGBreakdownError(it, "delta is zero")
        beta = ftz_div(delta_next, delta, fmt)               # line 14
        launch()
        p = dist_axpy(machine, beta, p, z, unit)             # line 15
        delta = delta_next

    state = PCGState(x, r, z, p, q, delta, alpha, beta, it, history)
    total = cycle_marks[-1] if cycle_marks else 0
    return PCGResult(x, state, converged, it, history, total, cycle_marks, rows)
