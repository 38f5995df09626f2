"""A small randomness battery: frequency, block frequency, runs, serial and
byte chi-square tests, with optional aggregation over disjoint substreams.

Bits are read MSB-first within each byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.special import erfc, gammaincc

TEST_NAMES = ("block_frequency", "byte_chi_square", "monobit", "runs", "serial2")
DEFAULT_ALPHA = 0.01
DEFAULT_BLOCK_LENGTH = 128


class InsufficientData(ValueError):
    pass


@dataclass
class TestReport:
    test_name: str
    params: Dict[str, float]
    statistic: float
    p_value: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "test": self.test_name,
            "params": self.params,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "pass": self.passed,
        }


def _report(name, params, statistic, p, alpha) -> TestReport:
    p = float(min(1.0, max(0.0, p)))
    return TestReport(name, params, float(statistic), p, p >= alpha)


def as_bits(data) -> np.ndarray:
    """uint8 0/1 array from bytes (MSB first) or pass a 0/1 array through."""
    if isinstance(data, (bytes, bytearray, memoryview)):
        return np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    arr = np.asarray(data, dtype=np.uint8)
    if arr.size and arr.max() > 1:
        raise ValueError("bit arrays must hold only 0 and 1")
    return arr


def _check_length(n, needed, name):
    if n < needed:
        raise InsufficientData(f"{name} needs at least {needed} bits, got {n}")


def monobit(bits, alpha: float = DEFAULT_ALPHA, min_length: int = 100) -> TestReport:
    """Frequency test: ``p = erfc(|S_n| / sqrt(2n))`` with ``S_n = #1 - #0``."""
    bits = as_bits(bits)
    n = bits.size
    _check_length(n, min_length, "monobit")
    s = 2 * int(np.count_nonzero(bits)) - n
    stat = abs(s) / math.sqrt(n)
    return _report("monobit", {"n": n}, stat, erfc(stat / math.sqrt(2)), alpha)


def block_frequency(bits, block_length: int = DEFAULT_BLOCK_LENGTH,
                    alpha: float = DEFAULT_ALPHA) -> TestReport:
    """Chi-square of per-block ones proportions over ``n // M`` blocks."""
    bits = as_bits(bits)
    M = int(block_length)
    if M < 20:
        raise ValueError("block length must be >= 20")
    _check_length(bits.size, 100 * M, "block_frequency")
    N = bits.size // M
    props = bits[: N * M].reshape(N, M).sum(axis=1, dtype=np.int64) / M
    chi2 = 4.0 * M * float(np.sum((props - 0.5) ** 2))
    return _report("block_frequency", {"M": M, "N": N}, chi2, gammaincc(N / 2, chi2 / 2), alpha)


def runs(bits, alpha: float = DEFAULT_ALPHA, min_length: int = 100) -> TestReport:
    """Total number of runs against its expectation given the ones proportion.

    When the proportion is too far from 1/2 for the runs statistic to be
    meaningful (``|pi - 1/2| >= 2/sqrt(n)``) the p-value is 0.
    """
    bits = as_bits(bits)
    n = bits.size
    _check_length(n, min_length, "runs")
    pi = np.count_nonzero(bits) / n
    if abs(pi - 0.5) >= 2 / math.sqrt(n):
        return _report("runs", {"n": n, "pi": pi}, 0.0, 0.0, alpha)
    v_obs = 1 + int(np.count_nonzero(bits[1:] != bits[:-1]))
    num = abs(v_obs - 2 * n * pi * (1 - pi))
    den = 2 * math.sqrt(2 * n) * pi * (1 - pi)
    return _report("runs", {"n": n, "pi": pi}, v_obs, erfc(num / den), alpha)


def _psi_sq(bits: np.ndarray, m: int) -> float:
    if m == 0:
        return 0.0
    n = bits.size
    idx = np.zeros(n, dtype=np.int64)
    for k in range(m):
        idx = (idx << 1) | np.roll(bits, -k)
    counts = np.bincount(idx, minlength=1 << m).astype(np.float64)
    return (1 << m) / n * float(np.dot(counts, counts)) - n


def serial2(bits, alpha: float = DEFAULT_ALPHA, min_length: int = 100) -> TestReport:
    """Serial test on overlapping 2-bit patterns of the circular stream.

    Statistic ``psi2_2 - psi2_1``; p-value ``igamc(1, stat/2)``.
    """
    bits = as_bits(bits)
    n = bits.size
    _check_length(n, min_length, "serial2")
    grad = _psi_sq(bits, 2) - _psi_sq(bits, 1)
    return _report("serial2", {"m": 2, "n": n}, grad, gammaincc(1.0, grad / 2), alpha)


def byte_chi_square(data, alpha: float = DEFAULT_ALPHA, min_bytes: int = 25600) -> TestReport:
    """Pearson chi-square of byte counts against uniform, 255 degrees of freedom."""
    arr = np.frombuffer(bytes(data), dtype=np.uint8) if not isinstance(data, np.ndarray) else data
    n = arr.size
    if n < min_bytes:
        raise InsufficientData(f"byte_chi_square needs at least {min_bytes} bytes, got {n}")
    counts = np.bincount(arr, minlength=256).astype(np.float64)
    expected = n / 256
    chi2 = float(np.sum((counts - expected) ** 2) / expected)
    return _report("byte_chi_square", {"n_bytes": n}, chi2, gammaincc(127.5, chi2 / 2), alpha)


def uniformity_p(p_values, bins: int = 10) -> float:
    """Chi-square p-value that ``p_values`` are uniform on [0, 1]."""
    p = np.asarray(p_values, dtype=np.float64)
    counts = np.bincount(np.minimum((p * bins).astype(np.int64), bins - 1), minlength=bins)
    expected = p.size / bins
    chi2 = float(np.sum((counts - expected) ** 2) / expected)
    return float(gammaincc((bins - 1) / 2, chi2 / 2))


def proportion_band(alpha: float, k: int) -> Tuple[float, float]:
    """Acceptable passing proportion for ``k`` streams: ``p ± 3 sqrt(p(1-p)/k)``."""
    p = 1 - alpha
    half = 3 * math.sqrt(p * alpha / k)
    return max(0.0, p - half), min(1.0, p + half)


@dataclass
class BatteryReport:
    reports: List[Tuple[int, TestReport]]
    stream_length_bits: int
    alpha: float
    substreams: int
    block_length: int = DEFAULT_BLOCK_LENGTH
    errors: List[Tuple[int, str, str]] = field(default_factory=list)
    uniformity_p: Optional[Dict[str, float]] = None

    def p_values(self, test: str) -> List[float]:
        return [r.p_value for _, r in self.reports if r.test_name == test]

    def pass_proportion(self, test: str) -> float:
        ps = [r.passed for _, r in self.reports if r.test_name == test]
        return sum(ps) / len(ps) if ps else math.nan

    def tests_run(self) -> List[str]:
        return [t for t in TEST_NAMES if self.p_values(t)]

    @property
    def insufficient(self) -> bool:
        return bool(self.errors)

    def within_band(self) -> bool:
        lo, hi = proportion_band(self.alpha, self.substreams)
        return all(lo <= self.pass_proportion(t) <= hi for t in self.tests_run())

    def to_dict(self) -> dict:
        return {
            "stream_length_bits": self.stream_length_bits,
            "alpha": self.alpha,
            "substreams": self.substreams,
            "block_length": self.block_length,
            "uniformity_p": self.uniformity_p,
            "proportions": {t: self.pass_proportion(t) for t in self.tests_run()},
            "proportion_band": list(proportion_band(self.alpha, self.substreams)),
            "errors": [{"substream": i, "test": t, "message": m} for i, t, m in self.errors],
            "reports": [dict(substream=i, **r.to_dict()) for i, r in self.reports],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_table(self) -> str:
        lo, hi = proportion_band(self.alpha, self.substreams)
        header = ("Test Name", "Resulting p-value[s]", "Proportion", "Uniformity p", "End Result")
        rows = []
        for t in self.tests_run():
            ps = self.p_values(t)
            shown = f"{ps[0]:.6f}" if len(ps) == 1 else f"min {min(ps):.6f}, max {max(ps):.6f}"
            prop = self.pass_proportion(t)
            uni = self.uniformity_p.get(t) if self.uniformity_p else None
            rows.append((
                t,
                shown,
                f"{sum(r.passed for _, r in self.reports if r.test_name == t)}/{len(ps)}",
                "-" if uni is None else f"{uni:.6f}",
                "PASSED" if lo <= prop <= hi else "FAILED",
            ))
        for i, t, m in self.errors:
            rows.append((t, f"substream {i}: {m}", "-", "-", "NO DATA"))
        widths = [max(len(str(r[c])) for r in [header, *rows]) for c in range(len(header))]
        line = "+".join("-" * (w + 2) for w in widths)
        fmt = lambda r: "|".join(f" {str(v):<{w}} " for v, w in zip(r, widths))
        return "\n".join([line, fmt(header), line, *map(fmt, rows), line])


_BIT_TESTS = (
    ("block_frequency", block_frequency),
    ("monobit", monobit),
    ("runs", runs),
    ("serial2", serial2),
)


def run_battery(data: bytes, alpha: float = DEFAULT_ALPHA, substreams: int = 1,
                block_length: int = DEFAULT_BLOCK_LENGTH) -> BatteryReport:
    """Run all five tests on each of ``substreams`` equal disjoint slices.

    Tests without enough data are recorded in ``errors`` instead of
    raising. With at least 10 substreams each test also gets a p-value
    uniformity score.
    """
    if substreams < 1:
        raise ValueError("substreams must be >= 1")
    arr = np.frombuffer(bytes(data), dtype=np.uint8)
    per = arr.size // substreams
    reports = []
    errors = []
    for i in range(substreams):
        chunk = arr[i * per:(i + 1) * per]
        bits = np.unpackbits(chunk)
        for name, fn in _BIT_TESTS:
            try:
                kw = {"block_length": block_length} if name == "block_frequency" else {}
                reports.append((i, fn(bits, alpha=alpha, **kw)))
            except InsufficientData as exc:
                errors.append((i, name, str(exc)))
        try:
            reports.append((i, byte_chi_square(chunk, alpha=alpha)))
        except InsufficientData as exc:
            errors.append((i, "byte_chi_square", str(exc)))
    reports.sort(key=lambda r: (r[0], r[1].test_name))
    errors.sort()
    battery = BatteryReport(reports, per * 8 * substreams, alpha, substreams, block_length, errors)
    if substreams >= 10:
        battery.uniformity_p = {t: uniformity_p(battery.p_values(t)) for t in battery.tests_run()}
    return battery
