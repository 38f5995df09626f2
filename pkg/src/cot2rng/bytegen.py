"""Random bytes from the binary64 iteration x <- 1/tan(x)**2.

Every step yields one iterate; its IEEE-754 bit pattern loses the two top
bytes (sign, exponent and the leading mantissa nibble) and the remaining
six bytes B5..B0 are emitted most-significant first.
"""

from __future__ import annotations

import math
import statistics
import struct
import time
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional

import numba
import numpy as np

PHI = 0.6180339887498949
BLOCK = 6

_PI_LO = 1.2246467991473532e-16  # pi - float(pi)


@dataclass
class GeneratorState:
    """Mutable generator state. One owner steps it at a time."""

    x: float
    seed: float
    iterations: int = 0
    reseed_events: int = 0


def near_pi_multiple(x: float) -> bool:
    """True when ``x`` is within one ulp of some integer multiple of pi."""
    r = math.remainder(x, math.pi)  # exact: x - k*float(pi)
    k = round((x - r) / math.pi)
    return abs(r - k * _PI_LO) <= math.ulp(x)


def seed_from_value(x0: float) -> GeneratorState:
    x0 = float(x0)
    if not math.isfinite(x0):
        raise ValueError(f"seed must be finite, got {x0!r}")
    if near_pi_multiple(x0):
        raise ValueError(f"seed {x0!r} lies on a pole of cot^2 (multiple of pi)")
    return GeneratorState(x=x0, seed=x0)


def seed_from_time(clock: Callable[[], int] = time.time_ns) -> GeneratorState:
    """Seed from the fractional second of a nanosecond clock, then step once."""
    ns = clock()
    x0 = (ns % 1_000_000_000) / 1e9
    if x0 == 0.0:
        x0 = 0.5
    state = GeneratorState(x=x0, seed=x0)
    return step(state)


def _recover(prev: float) -> float:
    y = prev + PHI
    return (y - math.floor(y)) + 0.1


def step(state: GeneratorState) -> GeneratorState:
    prev = state.x
    t = math.tan(prev)
    y = t * t
    x = 1.0 / y if y != 0.0 else math.inf
    if not math.isfinite(x) or x == 0.0 or x == prev:
        x = _recover(prev)
        state.reseed_events += 1
    state.x = x
    state.iterations += 1
    return state


def extract_bytes(x: float) -> bytes:
    """Bytes B5..B0 of the binary64 pattern of ``x`` (low 48 bits, big-endian)."""
    return struct.pack(">d", x)[2:]


def hex_mantissa(x: float) -> str:
    """The 52-bit fraction field of a normal double as 13 lowercase hex digits."""
    (bits,) = struct.unpack(">Q", struct.pack(">d", x))
    exponent = (bits >> 52) & 0x7FF
    if exponent == 0 or exponent == 0x7FF:
        raise ValueError(f"{x!r} is not a finite normal number")
    return format(bits & ((1 << 52) - 1), "013x")


@numba.njit(cache=True, error_model="numpy")
def _fill_kernel(x, nblocks, out):
    cell = np.empty(1, np.float64)
    word = cell.view(np.uint64)
    reseeds = 0
    j = 0
    for _ in range(nblocks):
        t = math.tan(x)
        y = t * t
        nx = 1.0 / y if y != 0.0 else math.inf
        if not math.isfinite(nx) or nx == 0.0 or nx == x:
            z = x + PHI
            nx = (z - np.floor(z)) + 0.1
            reseeds += 1
        x = nx
        cell[0] = x
        w = word[0]
        out[j] = (w >> 40) & 0xFF
        out[j + 1] = (w >> 32) & 0xFF
        out[j + 2] = (w >> 24) & 0xFF
        out[j + 3] = (w >> 16) & 0xFF
        out[j + 4] = (w >> 8) & 0xFF
        out[j + 5] = w & 0xFF
        j += 6
    return x, reseeds


def fill_into(state: GeneratorState, out: np.ndarray) -> GeneratorState:
    """Fill a uint8 buffer whose length is a multiple of 6."""
    nblocks = len(out) // BLOCK
    if nblocks * BLOCK != len(out):
        raise ValueError("buffer length must be a multiple of 6")
    x, reseeds = _fill_kernel(state.x, nblocks, out)
    state.x = float(x)
    state.iterations += nblocks
    state.reseed_events += int(reseeds)
    return state


def fill(state: GeneratorState, n_bytes: int) -> bytes:
    """Next ``n_bytes`` of the stream; advances ``ceil(n_bytes/6)`` steps."""
    if n_bytes < 0:
        raise ValueError("n_bytes must be >= 0")
    if n_bytes == 0:
        return b""
    buf = np.empty(-(-n_bytes // BLOCK) * BLOCK, dtype=np.uint8)
    fill_into(state, buf)
    return buf[:n_bytes].tobytes()


def stream(state: GeneratorState, n_bytes: int, chunk_size: int = 6 << 20) -> Iterator[memoryview]:
    """Yield the next ``n_bytes`` in chunks, reusing one buffer.

    Each chunk is only valid until the next one is requested.
    """
    chunk_size = max(BLOCK, chunk_size - chunk_size % BLOCK)
    buf = np.empty(chunk_size, dtype=np.uint8)
    remaining = n_bytes
    while remaining > 0:
        take = min(remaining, chunk_size)
        view = buf[: -(-take // BLOCK) * BLOCK]
        fill_into(state, view)
        yield memoryview(view)[:take]
        remaining -= take


@dataclass
class BenchResult:
    n_bytes: int
    seconds: List[float]

    @property
    def rates(self) -> List[float]:
        return [self.n_bytes / s / 1e6 for s in self.seconds]

    @property
    def median_mb_s(self) -> float:
        return statistics.median(self.rates)


def benchmark(n_bytes: int, reps: int = 3, seed: Optional[float] = None) -> BenchResult:
    """Time generation of ``n_bytes`` into a discarded buffer, ``reps`` times."""
    if n_bytes < 10**6:
        raise ValueError("benchmark needs at least 10**6 bytes")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    # compile outside the timed region
    fill(seed_from_value(1.0), BLOCK)
    seconds = []
    for _ in range(reps):
        state = seed_from_time() if seed is None else seed_from_value(seed)
        t0 = time.perf_counter()
        for _chunk in stream(state, n_bytes):
            pass
        seconds.append(time.perf_counter() - t0)
    return BenchResult(n_bytes, seconds)
