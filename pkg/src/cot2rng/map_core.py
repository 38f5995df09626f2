"""Catalog of periodic singular maps and their normalized circle forms.

Each map ``g`` with period ``T`` is folded onto the unit interval by

    N_g(x) = (g(x*T) mod T) / T,   0 < x < 1

using a floored modulus, so the result always lies in ``[0, 1)``.

The scalar formulas are compiled with numba so that the bulk orbit and
cycle kernels in :mod:`cot2rng.dynamics` share exactly the same binary64
arithmetic as the per-point API below.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numba
import numpy as np


class MapId(str, enum.Enum):
    COT2 = "cot2"
    INV_X_SQ = "inv_x_sq"
    INV_ONE_MINUS_X = "inv_one_minus_x"
    INV_COS = "inv_cos"
    INV_SIN_SQ = "inv_sin_sq"
    SAWTOOTH = "sawtooth"

    @property
    def code(self) -> int:
        return _CODES[self]


_CODES = {m: i for i, m in enumerate(MapId)}


class Status(str, enum.Enum):
    OK = "ok"
    SINGULAR = "singular"
    NON_FINITE = "non_finite"


# kernel-side status codes, index into _STATUS
OK, SINGULAR, NON_FINITE = 0, 1, 2
_STATUS = (Status.OK, Status.SINGULAR, Status.NON_FINITE)

# largest binary64 strictly below 1
ONE_MINUS = 1.0 - 2.0**-53


@dataclass(frozen=True)
class EvalResult:
    value: float
    status: Status = Status.OK

    @property
    def ok(self) -> bool:
        return self.status is Status.OK


@dataclass(frozen=True)
class PeriodicMap:
    """A registered map: formula id, folding period and known singular points.

    ``discontinuities`` lists the points of ``[0, 1]`` where the normalized
    form is undefined (poles of ``g(x*T)``, and for the sawtooth the points
    where ``m*(1-x)`` is an integer).
    """

    id: MapId
    period: float
    slope_param: Optional[float] = None
    discontinuities: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "id", MapId(self.id))
        if not (self.period > 0 and math.isfinite(self.period)):
            raise ValueError(f"period must be positive and finite, got {self.period!r}")
        if self.id is MapId.SAWTOOTH:
            if self.slope_param is None or not math.isfinite(self.slope_param):
                raise ValueError("sawtooth requires a finite slope_param")
        elif self.slope_param is not None:
            raise ValueError(f"{self.id.value} takes no slope_param")
        disc = tuple(float(z) for z in self.discontinuities)
        if any(not 0.0 <= z <= 1.0 for z in disc):
            raise ValueError(f"discontinuities must lie in [0, 1]: {disc}")
        object.__setattr__(self, "discontinuities", disc)

    @property
    def code(self) -> int:
        return self.id.code

    @property
    def slope(self) -> float:
        # kernels take a plain float; unused for non-sawtooth maps
        return 0.0 if self.slope_param is None else float(self.slope_param)

    def disc_array(self) -> np.ndarray:
        return np.asarray(self.discontinuities, dtype=np.float64)


_PERIODS = {
    MapId.COT2: math.pi / 2,
    MapId.INV_X_SQ: 1.0,
    MapId.INV_ONE_MINUS_X: 1.0,
    MapId.INV_COS: math.pi,
    MapId.INV_SIN_SQ: math.pi,
    MapId.SAWTOOTH: 1.0,
}


def _sawtooth_breaks(m: float) -> tuple:
    if m == 0:
        raise ValueError("sawtooth slope must be nonzero")
    lo, hi = math.ceil(min(0.0, m)), math.floor(max(0.0, m))
    return tuple(sorted({min(1.0, max(0.0, 1.0 - k / m)) for k in range(lo, hi + 1)}))


def _default_discontinuities(map_id: MapId, period: float, slope) -> tuple:
    if map_id is MapId.SAWTOOTH:
        return _sawtooth_breaks(slope)
    if map_id is MapId.INV_X_SQ:
        return (0.0,)
    if map_id is MapId.INV_ONE_MINUS_X:
        return (1.0,) if period >= 1.0 else ()
    # trigonometric maps: poles of g at multiples of pi (or odd multiples of pi/2 for 1/cos)
    step = math.pi if map_id in (MapId.COT2, MapId.INV_SIN_SQ) else math.pi / 2
    first = 0.0 if map_id is not MapId.INV_COS else math.pi / 2
    out = []
    k = 0
    while first + k * step <= period * (1 + 1e-15):
        out.append(min(1.0, (first + k * step) / period))
        k += 1 if map_id is not MapId.INV_COS else 2
    return tuple(out)


def get_map(map_id: Union[str, MapId, PeriodicMap], slope: Optional[float] = None,
            period: Optional[float] = None) -> PeriodicMap:
    """Look up a catalog map, optionally overriding the folding period."""
    if isinstance(map_id, PeriodicMap):
        return map_id
    mid = MapId(map_id)
    T = _PERIODS[mid] if period is None else float(period)
    if mid is MapId.SAWTOOTH and slope is None:
        raise ValueError("sawtooth requires a slope")
    s = float(slope) if mid is MapId.SAWTOOTH else None
    return PeriodicMap(mid, T, s, _default_discontinuities(mid, T, s))


# --------------------------------------------------------------------------
# compiled scalar formulas


@numba.njit(cache=True, error_model="numpy")
def _fold_unit(v, period):
    r = v % period
    q = r / period
    if q >= 1.0:
        q = ONE_MINUS
    return q


@numba.njit(cache=True, error_model="numpy")
def raw_value(code, m, x):
    """Defining formula of map ``code``; returns ``(value, status_code)``."""
    if code == 0:
        t = math.tan(x)
        if t == 0.0:
            return 0.0, SINGULAR
        y = t * t
        if y == 0.0:
            return math.inf, NON_FINITE
        v = 1.0 / y
    elif code == 1:
        if x == 0.0:
            return 0.0, SINGULAR
        y = x * x
        if y == 0.0:
            return math.inf, NON_FINITE
        v = 1.0 / y
    elif code == 2:
        d = 1.0 - x
        if d == 0.0:
            return 0.0, SINGULAR
        v = 1.0 / d
    elif code == 3:
        c = math.cos(x)
        if c == 0.0:
            return 0.0, SINGULAR
        v = 1.0 / c
    elif code == 4:
        s = math.sin(x)
        if s == 0.0:
            return 0.0, SINGULAR
        y = s * s
        if y == 0.0:
            return math.inf, NON_FINITE
        v = 1.0 / y
    else:
        v = m * (1.0 - x)
        if not math.isfinite(v):
            return v, NON_FINITE
        return _fold_unit(v, 1.0), OK
    if not math.isfinite(v):
        return v, NON_FINITE
    return v, OK


@numba.njit(cache=True, error_model="numpy")
def normalized_value(code, m, period, disc, x):
    for z in disc:
        if x == z:
            return 0.0, SINGULAR
    v, st = raw_value(code, m, x * period)
    if st != OK:
        return v, st
    return _fold_unit(v, period), OK


@numba.njit(cache=True, error_model="numpy")
def derivative_value(code, m, x):
    """|g'(x)| of the unfolded formula."""
    if code == 0 or code == 4:
        s = math.sin(x)
        if s == 0.0:
            return 0.0, SINGULAR
        v = abs(2.0 * math.cos(x) / (s * s * s))
    elif code == 1:
        if x == 0.0:
            return 0.0, SINGULAR
        v = abs(2.0 / (x * x * x))
    elif code == 2:
        d = 1.0 - x
        if d == 0.0:
            return 0.0, SINGULAR
        v = 1.0 / (d * d)
    elif code == 3:
        c = math.cos(x)
        if c == 0.0:
            return 0.0, SINGULAR
        v = abs(math.sin(x) / (c * c))
    else:
        return abs(m), OK
    if not math.isfinite(v):
        return v, NON_FINITE
    return v, OK


# --------------------------------------------------------------------------
# public per-point API

MapLike = Union[str, MapId, PeriodicMap]


def _wrap(pair) -> EvalResult:
    v, st = pair
    return EvalResult(float(v), _STATUS[st])


def eval_raw(pmap: MapLike, x: float) -> EvalResult:
    """Evaluate the defining formula ``g(x)``.

    ``cot2`` is computed as ``1/tan(x)**2``. Status is ``singular`` when the
    formula's denominator is exactly zero in binary64 and ``non_finite`` when
    the value overflows.
    """
    pmap = get_map(pmap)
    if not math.isfinite(x):
        raise ValueError(f"x must be finite, got {x!r}")
    return _wrap(raw_value(pmap.code, pmap.slope, float(x)))


def eval_normalized(pmap: MapLike, x: float) -> EvalResult:
    pmap = get_map(pmap)
    if not 0.0 < x < 1.0:
        raise ValueError(f"normalized maps are defined on (0, 1), got {x!r}")
    return _wrap(normalized_value(pmap.code, pmap.slope, pmap.period, pmap.disc_array(), float(x)))


def eval_derivative(pmap: MapLike, x: float) -> EvalResult:
    """Magnitude of the derivative of ``g`` at ``x``.

    Folding by the modulus leaves the slope unchanged away from the jumps,
    so the slope of the normalized map at ``u`` is this value at ``u*T``
    (see :func:`normalized_derivative`).
    """
    pmap = get_map(pmap)
    if not math.isfinite(x):
        raise ValueError(f"x must be finite, got {x!r}")
    return _wrap(derivative_value(pmap.code, pmap.slope, float(x)))


def normalized_derivative(pmap: MapLike, u: float) -> EvalResult:
    pmap = get_map(pmap)
    return _wrap(derivative_value(pmap.code, pmap.slope, float(u) * pmap.period))


def eval_sawtooth(m: float, x: float) -> float:
    """``m*(1-x) mod 1`` on the open unit interval."""
    if not 0.0 < x < 1.0:
        raise ValueError(f"x must lie in (0, 1), got {x!r}")
    return float(_fold_unit(m * (1.0 - x), 1.0))


def cot2_cos_sin(x: float) -> float:
    """cot^2 via ``(cos/sin)**2``; the generator uses ``1/tan**2`` instead."""
    return (math.cos(x) / math.sin(x)) ** 2


def catalog() -> Sequence[MapId]:
    return list(MapId)
