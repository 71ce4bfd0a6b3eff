from .distvec import DistVector, GridDistribution
from .dot import (
    Granularity,
    ReductionConfig,
    Routing,
    global_dot,
    local_dot_partial,
    predict_reduction_speedup,
)
from .vecops import dist_axpy, dist_eltwise, dist_scale

__all__ = [
    "DistVector", "GridDistribution",
    "Granularity", "ReductionConfig", "Routing",
    "global_dot", "local_dot_partial", "predict_reduction_speedup",
    "dist_axpy", "dist_eltwise", "dist_scale",
]
