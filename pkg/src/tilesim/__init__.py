"""tilesim: deterministic cycle-approximate simulator of a tile-based spatial
accelerator, with bit-faithful BF16/FP32 flush-to-zero numerics, a kernel
library (vector arithmetic, global reduction, 7-point 3D stencil) and a
preconditioned conjugate-gradient solver built from those kernels."""

from .backend import ACTIVE as BACKEND
from .formats import ScalarFmt

__version__ = "0.1.0"

__all__ = ["BACKEND", "ScalarFmt", "__version__"]
