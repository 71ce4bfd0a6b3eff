"""2D-torus NoC cost model: dimension-order routed unicast and tree multicast.

Hop counts take the shorter ring direction per dimension. Costs are
per-message (link contention is not modeled; the routing-pattern results in
the source material show the network far from saturation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple


class CoreCoord(NamedTuple):
    x: int
    y: int


@dataclass
class NoCConfig:
    hop_latency: int = 1        # cycles/hop
    link_bandwidth: int = 32    # bytes/cycle

    def __post_init__(self):
        if self.hop_latency <= 0 or self.link_bandwidth <= 0:
            raise ValueError("NoC parameters must be positive")


def _ring_dist(a: int, b: int, size: int) -> int:
    d = abs(a - b)
    return min(d, size - d)


def torus_hops(src: CoreCoord, dst: CoreCoord, width: int, height: int) -> int:
    for c in (src, dst):
        if not (0 <= c.x < width and 0 <= c.y < height):
            raise ValueError("coordinates outside grid")
    return _ring_dist(src.x, dst.x, width) + _ring_dist(src.y, dst.y, height)


def unicast_cost(cfg: NoCConfig, src: CoreCoord, dst: CoreCoord,
                 nbytes: int, width: int, height: int) -> int:
    """hops * hop_latency + ceil(len / link_bandwidth); self-send is 0 hops."""
    if nbytes % 16:
        raise ValueError("NoC payload must be a multiple of 16 bytes")
    hops = torus_hops(src, dst, width, height)
    return hops * cfg.hop_latency + math.ceil(nbytes / cfg.link_bandwidth)


def multicast_cost(cfg: NoCConfig, root: CoreCoord, rect, nbytes: int,
                   width: int, height: int) -> int:
    """Tree-latency model: max unicast cost over destinations in rect.

    rect is an iterable of CoreCoord; root must be a member.
    """
    rect = list(rect)
    if not rect:
        raise ValueError("empty rectangle")
    if root not in rect:
        raise ValueError("multicast root must lie inside the rectangle")
    return max(unicast_cost(cfg, root, dst, nbytes, width, height) for dst in rect)
