"""Flat key-value configuration: `key = value` lines with dotted keys.

Documented keys (all optional, defaults shown):

  grid.width            = 8
  grid.height           = 7
  noc.hop_latency       = 1
  noc.link_bandwidth    = 32
  sram.capacity         = 1572864
  sram.reserved_overhead= 180224
  dram.bandwidth        = 64

Lines starting with '#' and blank lines are ignored. Unknown keys are
configuration errors.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .core import DEFAULT_RESERVED_OVERHEAD, DEFAULT_SRAM_CAPACITY, ConfigError
from .noc import NoCConfig

_KEYS = {
    "grid.width": ("grid_width", int),
    "grid.height": ("grid_height", int),
    "noc.hop_latency": ("hop_latency", int),
    "noc.link_bandwidth": ("link_bandwidth", int),
    "sram.capacity": ("sram_capacity", int),
    "sram.reserved_overhead": ("reserved_overhead", int),
    "dram.bandwidth": ("dram_bandwidth", int),
}


@dataclass
class SimConfig:
    grid_width: int = 8
    grid_height: int = 7
    hop_latency: int = 1
    link_bandwidth: int = 32
    sram_capacity: int = DEFAULT_SRAM_CAPACITY
    reserved_overhead: int = DEFAULT_RESERVED_OVERHEAD
    dram_bandwidth: int = 64

    def noc(self) -> NoCConfig:
        return NoCConfig(self.hop_latency, self.link_bandwidth)

    def with_grid(self, width: int, height: int) -> "SimConfig":
        return replace(self, grid_width=width, grid_height=height)


def parse_config_file(path) -> SimConfig:
    cfg = SimConfig()
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown config key: {key}")
            attr, conv = _KEYS[key]
            try:
                setattr(cfg, attr, conv(value.strip()))
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value.strip()!r}") from None
    _validate(cfg)
    return cfg


def _validate(cfg: SimConfig):
    if cfg.grid_width < 1 or cfg.grid_height < 1:
        raise ConfigError("grid dimensions must be positive")
    if cfg.hop_latency <= 0 or cfg.link_bandwidth <= 0 or cfg.dram_bandwidth <= 0:
        raise ConfigError("noc/dram parameters must be positive")
    if cfg.sram_capacity <= cfg.reserved_overhead:
        raise ConfigError("sram.capacity must exceed sram.reserved_overhead")
