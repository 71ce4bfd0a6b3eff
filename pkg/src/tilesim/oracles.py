"""Independent oracles for the derived-value tests and cmd_validate.

Everything here recomputes expected values through a different path than the
implementation it checks: explicit index loops instead of layout permutation
tables, an assembled sparse matrix instead of tile shifts and halo exchange,
an order-replaying chain instead of the NoC reduction, and a plain float64
matrix-free CG as the solver reference. Only the scalar flush-to-zero
primitives are shared; they are the arithmetic under test everywhere.
"""

from __future__ import annotations

import math

import numpy as np

from . import backend
from .formats import ScalarFmt, ftz_add, ftz_mul, scalar_from_f64
from .kernels.dot import Granularity, ReductionConfig, Routing, _route_hops
from .kernels.stencil import StencilCoeffs
from .tile import SUBTILE, TILE_ELEMS, Tile, TileShape


# -- numerics oracles ---------------------------------------------------------------

def eltwise_scalar_oracle(op: str, a: np.ndarray, b: np.ndarray, fmt: ScalarFmt) -> np.ndarray:
    """Element-by-element scalar-loop version of tile_eltwise."""
    from .formats import ftz_sub
    ops = {"add": ftz_add, "sub": ftz_sub, "mul": ftz_mul}[op]
    out = np.empty_like(np.asarray(a, dtype=fmt.np_dtype))
    af = np.asarray(a, dtype=np.float64).reshape(-1)
    bf = np.asarray(b, dtype=np.float64).reshape(-1)
    flat = out.reshape(-1)
    for i in range(af.size):
        flat[i] = ops(float(af[i]), float(bf[i]), fmt)
    return out


def reduce_order_oracle(phys_values: np.ndarray, fmt: ScalarFmt) -> float:
    """The defined reduction order executed with the scalar primitives:
    fold each physical 16x16 subtile row-major from its first element, then
    fold the four subtile sums left-to-right."""
    v = [float(x) for x in np.asarray(phys_values).reshape(TILE_ELEMS)]
    sums = []
    for blk in range(4):
        acc = v[blk * 256]
        for i in range(1, 256):
            acc = ftz_add(acc, v[blk * 256 + i], fmt)
        sums.append(acc)
    total = sums[0]
    for s in sums[1:]:
        total = ftz_add(total, s, fmt)
    return total


def layout_image_oracle(logical: np.ndarray, shape: TileShape, fmt: ScalarFmt) -> bytes:
    """Brute-force physical image: walk the subtiles in their defined order
    and emit each row-major, converting every element independently."""
    rows, cols = shape.value
    if shape is TileShape.R32x32:
        corners = [(0, 0), (0, 16), (16, 0), (16, 16)]
    else:
        corners = [(0, 0), (16, 0), (32, 0), (48, 0)]
    out = bytearray()
    for (r0, c0) in corners:
        for r in range(r0, r0 + SUBTILE):
            for c in range(c0, c0 + SUBTILE):
                x = np.float32(logical[r, c])
                if fmt is ScalarFmt.BF16:
                    out += int(x.view(np.uint32) >> 16).to_bytes(2, "little")
                elif fmt is ScalarFmt.FP32:
                    out += x.tobytes()
                else:
                    out += np.float64(logical[r, c]).tobytes()
    return bytes(out)


def matmul_oracle(a: np.ndarray, b: np.ndarray, fmt: ScalarFmt) -> np.ndarray:
    """Triple loop with the stated accumulation order (k ascending, rounding
    after every multiply and every add)."""
    out = np.zeros((8, 16), dtype=np.float32)
    for i in range(8):
        for j in range(16):
            acc = ftz_mul(float(a[i][0]), float(b[0][j]), fmt)
            for k in range(1, 16):
                acc = ftz_add(acc, ftz_mul(float(a[i][k]), float(b[k][j]), fmt), fmt)
            out[i, j] = acc
    return out


# -- stencil oracles ------------------------------------------------------------------

_DIRS = ("center", "below", "above", "north", "south", "west", "east")
_OFFSETS = {
    "center": (0, 0, 0), "below": (0, 0, -1), "above": (0, 0, 1),
    "north": (0, -1, 0), "south": (0, 1, 0), "west": (-1, 0, 0), "east": (1, 0, 0),
}


def _coeff(cf: StencilCoeffs, d: str) -> float:
    return getattr(cf, d)


def stencil_triple_loop(u: np.ndarray, coeffs: StencilCoeffs, fmt: ScalarFmt) -> np.ndarray:
    """Per-point FTZ evaluation in the fixed accumulation order
    (center, below, above, north, south, west, east); out-of-domain
    neighbors are skipped (zero Dirichlet). Python loops; small grids only."""
    nz, ny, nx = u.shape
    cf = coeffs.rounded(fmt)
    out = np.zeros_like(u)
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                acc = ftz_mul(_coeff(cf, "center"), float(u[k, j, i]), fmt)
                for d in _DIRS[1:]:
                    di, dj, dk = _OFFSETS[d]
                    ii, jj, kk = i + di, j + dj, k + dk
                    if 0 <= ii < nx and 0 <= jj < ny and 0 <= kk < nz:
                        acc = ftz_add(acc, ftz_mul(_coeff(cf, d), float(u[kk, jj, ii]), fmt), fmt)
                out[k, j, i] = acc
    return out


def assemble_matrix(nx: int, ny: int, nz: int, coeffs: StencilCoeffs, fmt: ScalarFmt):
    """Assemble A in coordinate form, one diagonal group per direction, using
    the linear index law idx = i + nx*(j + ny*k). Returns
    {direction: (cols, valid_mask, coeff)} keyed in accumulation order."""
    cf = coeffs.rounded(fmt)
    k, j, i = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
    groups = {}
    for d in _DIRS:
        di, dj, dk = _OFFSETS[d]
        ii, jj, kk = i + di, j + dj, k + dk
        valid = ((0 <= ii) & (ii < nx) & (0 <= jj) & (jj < ny) & (0 <= kk) & (kk < nz)).reshape(-1)
        cols = (np.clip(ii, 0, nx - 1) + nx * (np.clip(jj, 0, ny - 1) + ny * np.clip(kk, 0, nz - 1))).reshape(-1)
        groups[d] = (cols, valid, _coeff(cf, d))
    return groups


def assembled_spmv(u: np.ndarray, coeffs: StencilCoeffs, fmt: ScalarFmt,
                   groups=None) -> np.ndarray:
    """SpMV against the explicitly assembled matrix, applied diagonal-group by
    diagonal-group in the defined accumulation order with FTZ arithmetic."""
    nz, ny, nx = u.shape
    if groups is None:
        groups = assemble_matrix(nx, ny, nz, coeffs, fmt)
    flat = np.asarray(u, dtype=fmt.np_dtype).reshape(-1)
    code = fmt.code
    cols, valid, coeff = groups["center"]
    out = backend.scale(coeff, flat[cols], code)
    for d in _DIRS[1:]:
        cols, valid, coeff = groups[d]
        if not valid.any():
            continue
        term = backend.scale(coeff, flat[cols[valid]], code)
        out[valid] = backend.eltwise(0, out[valid], term, code)
    return out.reshape(u.shape)


def reference_pcg_f64(b: np.ndarray, coeffs: StencilCoeffs, tol: float,
                      max_iters: int = 100_000):
    """Textbook matrix-free Jacobi-PCG in plain float64 (no FTZ, no tiles).

    Stops on the absolute residual 2-norm. Returns (x, iterations, history).
    """
    nz, ny, nx = b.shape
    cf = coeffs

    def apply_a(u):
        out = cf.center * u
        out[:, :, 1:] += cf.west * u[:, :, :-1]
        out[:, :, :-1] += cf.east * u[:, :, 1:]
        out[:, 1:, :] += cf.north * u[:, :-1, :]
        out[:, :-1, :] += cf.south * u[:, 1:, :]
        out[1:, :, :] += cf.below * u[:-1, :, :]
        out[:-1, :, :] += cf.above * u[1:, :, :]
        return out

    b = np.asarray(b, dtype=np.float64)
    x = np.zeros_like(b)
    r = b - apply_a(x)
    z = r / cf.center
    p = z.copy()
    history = [float(np.linalg.norm(r))]
    if history[-1] <= tol:
        return x, 0, history
    for it in range(1, max_iters + 1):
        q = apply_a(p)
        delta = float((r * z).sum())
        pq = float((p * q).sum())
        alpha = delta / pq
        x = x + alpha * p
        r = r - alpha * q
        history.append(float(np.linalg.norm(r)))
        if history[-1] <= tol:
            return x, it, history
        z = r / cf.center
        delta_next = float((r * z).sum())
        beta = delta_next / delta
        p = z + beta * p
    return x, max_iters, history


# -- reduction order-replay oracle ------------------------------------------------------

def oracle_global_dot(x_tiles: dict, y_tiles: dict, fmt: ScalarFmt, width: int,
                      height: int, cfg: ReductionConfig) -> float:
    """Replay the documented hop/merge order of global_dot on plain arrays.

    x_tiles/y_tiles: {coord: list of (1024,) physical value arrays}. The
    per-core partial, the per-hop merges and the final reduce use the scalar
    primitives and the defined orders only.
    """
    code = fmt.code
    acc = {}
    for c, xs in x_tiles.items():
        part = backend.eltwise(2, xs[0], y_tiles[c][0], code)
        for xi, yi in zip(xs[1:], y_tiles[c][1:]):
            part = backend.eltwise(0, part, backend.eltwise(2, xi, yi, code), code)
        acc[c] = part
    if cfg.granularity is Granularity.SCALAR_FIRST:
        acc = {c: reduce_order_oracle(v, fmt) for c, v in acc.items()}
    root, hops = _route_hops(width, height, cfg.routing)
    for src, dst in hops:
        if cfg.granularity is Granularity.SCALAR_FIRST:
            acc[dst] = ftz_add(acc[dst], acc[src], fmt)
        else:
            acc[dst] = backend.eltwise(0, acc[dst], acc[src], code)
    if cfg.granularity is Granularity.SCALAR_FIRST:
        return acc[root]
    return reduce_order_oracle(acc[root], fmt)


# -- small pieces ------------------------------------------------------------------------

def ring_distance_oracle(a: int, b: int, size: int) -> int:
    """Shortest walk on a ring, by enumeration."""
    best = size
    for direction in (1, -1):
        steps = 0
        pos = a
        while pos != b:
            pos = (pos + direction) % size
            steps += 1
        best = min(best, steps)
    return best


def norm2_f64(v: np.ndarray) -> float:
    return float(math.sqrt(float((np.asarray(v, dtype=np.float64) ** 2).sum())))
