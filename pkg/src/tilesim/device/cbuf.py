"""Circular buffers: bounded FIFOs of tile-sized pages in a core's SRAM.

A CB owns a contiguous SRAM region of capacity * page_size bytes. Pages are
pushed/popped FIFO; slot assignment is sequential modulo capacity, so a CB
that is filled once and never popped holds its pages contiguously from the
region start (which is what the stencil's pointer-shift views rely on).

The read pointer can be nudged by multiples of 32 bytes (cb_offset_read_ptr)
to realize row shifts; the adjusted pointer must stay inside the region.

Timestamps: each page records the producer cycle at push; each freed slot
records the consumer cycle at pop. The scheduler uses these to order the
simulated clocks of communicating tasks.
"""

from __future__ import annotations

from collections import deque


class CBError(Exception):
    pass


class CircularBuffer:
    def __init__(self, name: str, page_size: int, capacity: int):
        if page_size <= 0 or capacity <= 0:
            raise CBError("CB page size and capacity must be positive")
        if page_size % 16:
            raise CBError("CB page size must be 16B aligned")
        self.name = name
        self.page_size = page_size
        self.capacity = capacity
        self.region = bytearray(page_size * capacity)
        self._push_count = 0
        self._pop_count = 0
        self._reserved = 0
        self.push_times: deque[int] = deque()
        self.free_times: deque[int] = deque([0] * capacity)
        self.read_offset = 0

    # -- state ----------------------------------------------------------------

    @property
    def occupied(self) -> int:
        return self._push_count - self._pop_count

    @property
    def write_ptr(self) -> int:
        return (self._push_count % self.capacity) * self.page_size

    @property
    def read_ptr(self) -> int:
        return (self._pop_count % self.capacity) * self.page_size + self.read_offset

    def total_bytes(self) -> int:
        return self.page_size * self.capacity

    # -- producer side ----------------------------------------------------------

    def can_reserve(self, n: int) -> bool:
        if n > self.capacity:
            raise CBError("request exceeds CB capacity")
        return len(self.free_times) - self._reserved >= n

    def reserve_back(self, n: int) -> int:
        """Claim n free slots; returns the cycle at which they became free."""
        if not self.can_reserve(n):
            raise CBError(f"CB '{self.name}' cannot reserve {n} pages now")
        t = 0
        for _ in range(n):
            t = max(t, self.free_times.popleft())
        self._reserved += n
        return t

    def write_reserved(self, i: int, data: bytes):
        """Write the i-th currently reserved slot (0-based)."""
        if i >= self._reserved:
            raise CBError("write past reservation")
        if len(data) != self.page_size:
            raise CBError("page write size mismatch")
        slot = (self._push_count + i) % self.capacity
        self.region[slot * self.page_size:(slot + 1) * self.page_size] = data

    def push_back(self, n: int, now: int = 0):
        if n > self._reserved:
            raise CBError("push without reservation")
        self._reserved -= n
        self._push_count += n
        self.push_times.extend([now] * n)

    # -- consumer side ----------------------------------------------------------

    def can_wait(self, n: int) -> bool:
        if n > self.capacity:
            raise CBError("request exceeds CB capacity")
        return self.occupied >= n

    def wait_front(self, n: int) -> int:
        """Returns the producer cycle at which the n-th page became visible."""
        if not self.can_wait(n):
            raise CBError(f"CB '{self.name}' has fewer than {n} pages")
        return max(list(self.push_times)[:n])

    def peek(self, i: int = 0) -> bytes:
        if i >= self.occupied:
            raise CBError("peek past occupancy")
        slot = ((self._pop_count + i) % self.capacity)
        return bytes(self.region[slot * self.page_size:(slot + 1) * self.page_size])

    def pop_front(self, n: int, now: int = 0):
        if not self.can_wait(n):
            raise CBError(f"CB '{self.name}' cannot pop {n} pages")
        self._pop_count += n
        for _ in range(n):
            self.push_times.popleft()
        self.free_times.extend([now] * n)

    # -- pointer manipulation ---------------------------------------------------

    def offset_read_ptr(self, delta_bytes: int):
        """Adjust the read view by a signed byte delta (multiple of 32)."""
        if delta_bytes % 32:
            raise CBError("unaligned pointer adjustment")
        new = self.read_ptr + delta_bytes
        if new < 0 or new > self.total_bytes():
            raise CBError("pointer escape")
        self.read_offset += delta_bytes

    def read_view(self, nbytes: int, extra_offset: int = 0) -> bytes:
        """Read nbytes starting from the (adjusted) read pointer."""
        start = self.read_ptr + extra_offset
        if start < 0 or start + nbytes > self.total_bytes():
            raise CBError("pointer escape")
        return bytes(self.region[start:start + nbytes])
