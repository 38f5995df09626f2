"""Orbits and numeric checks of the chaos conditions for the catalog maps."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numba
import numpy as np

from . import bytegen
from .map_core import (
    OK,
    MapLike,
    get_map,
    normalized_derivative,
    normalized_value,
    raw_value,
)


class Mode(str, enum.Enum):
    RAW = "raw"
    NORMALIZED = "normalized"
    FRACTIONAL = "fractional"


_MODE_CODES = {Mode.RAW: 0, Mode.NORMALIZED: 1, Mode.FRACTIONAL: 2}


@dataclass
class Orbit:
    map_id: str
    mode: Mode
    points: np.ndarray
    truncated: bool = False

    def __len__(self):
        return len(self.points)


@dataclass
class CycleResult:
    found: bool
    start_index: int = 0
    period: int = 0
    truncated: bool = False
    steps: int = 0


@dataclass
class FixedPointResult:
    converged: bool
    value: float
    iterations: int
    residual: float


@dataclass
class EscapeRecord:
    start: float
    steps: int
    landing: float
    landing_slope: float
    escaped: bool


@dataclass
class ExpansivenessReport:
    map_id: str
    grid_size: int
    min_slope: float
    non_expansive_intervals: List[Tuple[float, float]]
    escape: List[EscapeRecord] = field(default_factory=list)
    skipped: int = 0
    # per-grid-point data; slope is nan at skipped points
    x: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    value: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    slope: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)

    @property
    def non_expansive_points(self) -> np.ndarray:
        return self.x[self.slope < 1.0]

    def summary(self) -> dict:
        return {
            "map": self.map_id,
            "grid_size": self.grid_size,
            "min_slope": self.min_slope,
            "skipped": self.skipped,
            "non_expansive_intervals": [list(iv) for iv in self.non_expansive_intervals],
            "escape": [
                {
                    "x_s": e.start,
                    "steps": e.steps,
                    "x_g": e.landing,
                    "landing_slope": e.landing_slope,
                    "escaped": e.escaped,
                }
                for e in self.escape
            ],
        }

    def rows(self):
        """One CSV row per grid point, escape columns blank where not sampled."""
        by_start = {e.start: e for e in self.escape}
        yield ("x", "value", "abs_derivative", "non_expansive", "escape_steps", "landing", "escaped")
        for x, v, s in zip(self.x, self.value, self.slope):
            e = by_start.get(float(x))
            tail = ("", "", "") if e is None else (e.steps, repr(e.landing), int(e.escaped))
            yield (repr(float(x)), repr(float(v)), repr(float(s)), int(s < 1.0), *tail)


# --------------------------------------------------------------------------
# compiled iteration kernels


@numba.njit(cache=True, error_model="numpy")
def _orbit_kernel(code, m, period, disc, x0, n, mode, out):
    out[0] = x0
    x = x0
    for k in range(n):
        if mode == 1:
            v, st = normalized_value(code, m, period, disc, x)
        else:
            v, st = raw_value(code, m, x)
        if st != OK:
            return k + 1
        x = v
        if mode == 2:
            out[k + 1] = v - np.floor(v)
        else:
            out[k + 1] = v
    return n + 1


@numba.njit(cache=True)
def _same(a, b):
    # bit equality for finite values: == except that 0.0 and -0.0 differ
    return a == b and (a != 0.0 or math.copysign(1.0, a) == math.copysign(1.0, b))


@numba.njit(cache=True, error_model="numpy")
def _brent_kernel(code, m, x0, max_iter):
    """Brent cycle search on raw iterates.

    Returns (found, start, period, truncated, steps).
    """
    power = 1
    lam = 1
    tortoise = x0
    hare, st = raw_value(code, m, x0)
    steps = 1
    if st != OK:
        return False, 0, 0, True, steps
    while not _same(tortoise, hare):
        if steps >= max_iter:
            return False, 0, 0, False, steps
        if power == lam:
            tortoise = hare
            power *= 2
            lam = 0
        hare, st = raw_value(code, m, hare)
        steps += 1
        lam += 1
        if st != OK:
            return False, 0, 0, True, steps
    # the cycle is known to exist, so these re-walks cannot hit a singularity
    tortoise = x0
    hare = x0
    for _ in range(lam):
        hare, st = raw_value(code, m, hare)
    mu = 0
    while not _same(tortoise, hare):
        tortoise, st = raw_value(code, m, tortoise)
        hare, st = raw_value(code, m, hare)
        mu += 1
    return True, mu, lam, False, steps


# --------------------------------------------------------------------------
# public operations


def iterate_orbit(pmap: MapLike, x0: float, n: int, mode="raw") -> Orbit:
    """Forward orbit ``x0, f(x0), ..., f^n(x0)``.

    In ``fractional`` mode the raw map is iterated and each recorded point
    is ``x - floor(x)``; iteration continues on the unreduced value. The
    orbit stops early with ``truncated=True`` on a singular or overflowing
    step.
    """
    pmap = get_map(pmap)
    mode = Mode(mode)
    if n < 1:
        raise ValueError("n must be >= 1")
    if not math.isfinite(x0):
        raise ValueError(f"x0 must be finite, got {x0!r}")
    if mode is Mode.NORMALIZED and not 0.0 < x0 < 1.0:
        raise ValueError(f"normalized orbits need x0 in (0, 1), got {x0!r}")
    out = np.empty(n + 1, dtype=np.float64)
    count = _orbit_kernel(pmap.code, pmap.slope, pmap.period, pmap.disc_array(),
                          float(x0), n, _MODE_CODES[mode], out)
    return Orbit(pmap.id.value, mode, out[:count].copy(), truncated=count < n + 1)


def detect_cycle(pmap: MapLike, x0: float, max_iter: int) -> CycleResult:
    """Find an exact (bit-identical) repeat in the raw orbit of ``x0``."""
    pmap = get_map(pmap)
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    found, mu, lam, truncated, steps = _brent_kernel(pmap.code, pmap.slope, float(x0), int(max_iter))
    return CycleResult(bool(found), int(mu), int(lam), bool(truncated), int(steps))


def find_fixed_point(pmap: MapLike, x0: float, tol: float, max_iter: int,
                     mode="normalized") -> FixedPointResult:
    """Plain fixed-point iteration, stopping once ``|f(x) - x| <= tol``.

    The reported value is the last iterate ``x`` and the residual is
    ``|f(x) - x|``, i.e. the final step length.
    """
    pmap = get_map(pmap)
    mode = Mode(mode)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if mode is Mode.FRACTIONAL:
        raise ValueError("fixed points are sought in raw or normalized mode")
    disc = pmap.disc_array()
    x = float(x0)
    residual = math.inf
    for k in range(max_iter):
        if mode is Mode.NORMALIZED:
            v, st = normalized_value(pmap.code, pmap.slope, pmap.period, disc, x)
        else:
            v, st = raw_value(pmap.code, pmap.slope, x)
        if st != OK:
            return FixedPointResult(False, x, k, math.inf)
        residual = abs(v - x)
        if residual <= tol:
            return FixedPointResult(True, x, k, residual)
        x = v
    return FixedPointResult(False, x, max_iter, residual)


def expansiveness_scan(pmap: MapLike, grid_size: int) -> ExpansivenessReport:
    """Sample ``|N'(x)|`` on the midpoint grid ``(i + 1/2)/grid_size``.

    Points within ``1/(10*grid_size)`` of a listed discontinuity, or where
    the slope is singular, are skipped and counted.
    """
    pmap = get_map(pmap)
    if grid_size < 100:
        raise ValueError("grid_size must be >= 100")
    radius = 1.0 / (10 * grid_size)
    disc = pmap.disc_array()
    xs = (np.arange(grid_size) + 0.5) / grid_size
    values = np.full(grid_size, np.nan)
    slopes = np.full(grid_size, np.nan)
    skipped = 0
    for i, x in enumerate(xs):
        if disc.size and np.min(np.abs(disc - x)) <= radius:
            skipped += 1
            continue
        d = normalized_derivative(pmap, x)
        v, st = normalized_value(pmap.code, pmap.slope, pmap.period, disc, x)
        if not d.ok or st != OK:
            skipped += 1
            continue
        slopes[i] = d.value
        values[i] = v

    flat = slopes < 1.0
    expansive = slopes >= 1.0
    min_slope = float(np.min(slopes[expansive])) if expansive.any() else math.nan
    return ExpansivenessReport(
        map_id=pmap.id.value,
        grid_size=grid_size,
        min_slope=min_slope,
        non_expansive_intervals=_runs_to_intervals(xs, flat),
        skipped=skipped,
        x=xs,
        value=values,
        slope=slopes,
    )


def _runs_to_intervals(xs: np.ndarray, mask: np.ndarray) -> List[Tuple[float, float]]:
    # each run of flagged grid points becomes [lo, hi] reaching halfway to the
    # neighbouring unflagged point, clipped to the outermost grid points
    out = []
    n = len(xs)
    i = 0
    while i < n:
        if not mask[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and mask[j + 1]:
            j += 1
        lo = xs[i] if i == 0 else 0.5 * (xs[i - 1] + xs[i])
        hi = xs[j] if j == n - 1 else 0.5 * (xs[j] + xs[j + 1])
        out.append((float(lo), float(hi)))
        i = j + 1
    return out


def escape_check(pmap: MapLike, report: ExpansivenessReport, max_steps: int,
                 samples: Optional[Sequence[float]] = None) -> ExpansivenessReport:
    """Follow non-expansive points forward until the slope exceeds 1.

    By default every non-expansive grid point of ``report`` is a sample.
    Each record holds the step count and landing point; samples still
    flat after ``max_steps`` (or stopped by a singularity) are recorded
    with ``escaped=False``.
    """
    pmap = get_map(pmap)
    if report.map_id != pmap.id.value:
        raise ValueError(f"report is for {report.map_id}, not {pmap.id.value}")
    if samples is None:
        samples = report.non_expansive_points
    disc = pmap.disc_array()
    records = []
    for xs in samples:
        xs = float(xs)
        x = xs
        slope = math.nan
        escaped = False
        steps = 0
        while steps < max_steps:
            v, st = normalized_value(pmap.code, pmap.slope, pmap.period, disc, x)
            steps += 1
            if st != OK:
                break
            x = v
            d = normalized_derivative(pmap, x)
            if not d.ok:
                break
            slope = d.value
            if slope > 1.0:
                escaped = True
                break
        records.append(EscapeRecord(xs, steps, float(x), float(slope), escaped))
    report.escape = records
    return report


def density_histogram(orbit: Orbit, bins: int, include_seed: bool = False) -> Tuple[np.ndarray, int]:
    """Histogram of orbit points on ``[0, 1)``; returns ``(counts, empty_bins)``."""
    if orbit.mode is Mode.RAW:
        raise ValueError("density needs a normalized or fractional orbit")
    if bins < 2:
        raise ValueError("bins must be >= 2")
    pts = orbit.points if include_seed else orbit.points[1:]
    idx = np.minimum((pts * bins).astype(np.int64), bins - 1)
    counts = np.bincount(idx, minlength=bins)
    return counts, int(np.count_nonzero(counts == 0))


def sensitivity_divergence(x0: float, delta: float, n: int) -> Optional[int]:
    """Index of the first differing byte between streams seeded ``x0`` and ``x0 + delta``."""
    if delta == 0:
        raise ValueError("delta must be nonzero")
    if n < 1:
        raise ValueError("n must be >= 1")
    a = bytegen.fill(bytegen.seed_from_value(x0), 6 * n)
    b = bytegen.fill(bytegen.seed_from_value(x0 + delta), 6 * n)
    for i, (p, q) in enumerate(zip(a, b)):
        if p != q:
            return i
    return None


UINT64_MAX = 2**64 - 1


def state_space_bound(base: int, digits: int, limit: int = UINT64_MAX) -> Tuple[int, bool]:
    """Number of states ``base**digits`` of an N-digit register.

    Saturates at ``limit`` (64-bit count by default); the flag reports
    whether saturation happened.
    """
    if base < 2 or digits < 1:
        raise ValueError("need base >= 2 and digits >= 1")
    # compare by logarithm first so huge exponents never get materialised
    if digits * math.log2(base) > math.log2(limit) + 1:
        return limit, True
    count = base**digits
    if count > limit:
        return limit, True
    return count, False
