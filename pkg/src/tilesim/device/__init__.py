from .cbuf import CBError, CircularBuffer
from .config import SimConfig, parse_config_file
from .core import ConfigError, CoreGrid, Dram, TensixCore
from .gridsim import Machine
from .noc import CoreCoord, NoCConfig, multicast_cost, torus_hops, unicast_cost
from .sched import DeadlockError, RunResult, TaskCtx, TraceZone, run_program

__all__ = [
    "CBError", "CircularBuffer", "SimConfig", "parse_config_file",
    "ConfigError", "CoreGrid", "Dram", "TensixCore", "Machine",
    "CoreCoord", "NoCConfig", "multicast_cost", "torus_hops", "unicast_cost",
    "DeadlockError", "RunResult", "TaskCtx", "TraceZone", "run_program",
]
