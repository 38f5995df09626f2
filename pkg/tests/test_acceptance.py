"""Acceptance criteria C1..C12, each at its stated tolerance.

Every test prints one ``[PASS]`` or ``[FAIL]`` line; the lines are repeated
in the terminal summary. Run with ``python3 -m pytest tests/test_acceptance.py -s``.
"""

import math
import struct
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from cot2rng import bytegen, cli, dynamics, stats
from cot2rng.map_core import eval_derivative, eval_raw


def verdict(cid, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {cid} {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_c1_determinism(tmp_path, capsys):
    # warm the compiled kernel so the timing covers generation only
    cli.main(["gen", "--seed", "1.0", "--n", "6", "--out", str(tmp_path / "warm")])
    paths = [tmp_path / "a.bin", tmp_path / "b.bin"]
    times = []
    for p in paths:
        t0 = time.perf_counter()
        code = cli.main(["gen", "--seed", "1.0", "--n", str(10**6), "--out", str(p)])
        times.append(time.perf_counter() - t0)
        assert code == 0
    capsys.readouterr()
    a, b = (p.read_bytes() for p in paths)
    ok = a == b and len(a) == 10**6 and max(times) < 1.0
    verdict("C1", ok, f"determinism: identical={a == b} len={len(a)} max_runtime={max(times):.3f}s (< 1 s)")


def test_c2_extraction_exactness():
    rng = np.random.default_rng(20)
    xs = []
    while len(xs) < 10**5:
        words = rng.integers(0, 2**64, size=2 * 10**5, dtype=np.uint64)
        vals = words.view(np.float64)
        xs.extend(vals[np.isfinite(vals)].tolist())
    xs = xs[:10**5]
    mismatches = 0
    for x in xs:
        (word,) = struct.unpack("<Q", struct.pack("<d", x))
        ref = (word & 0xFFFF_FFFF_FFFF).to_bytes(6, "big")
        mismatches += bytegen.extract_bytes(x) != ref
    verdict("C2", mismatches == 0, f"extraction: {len(xs)} values, mismatches={mismatches}")


def test_c3_spot_values():
    d = eval_derivative("cot2", math.pi / 4).value
    r = eval_raw("cot2", math.pi / 4).value
    h = bytegen.hex_mantissa(1 / 3)
    ok = abs(d - 4) <= 1e-12 and abs(r - 1) <= 1e-12 and h == "5555555555555"
    verdict("C3", ok, f"spot values: |g'(pi/4)|={d!r} g(pi/4)={r!r} hex(1/3)={h}")


def test_c4_sensitivity():
    a = bytegen.fill(bytegen.seed_from_value(1.0000000), 600)
    b = bytegen.fill(bytegen.seed_from_value(1.0000001), 600)
    first = next((i for i, (p, q) in enumerate(zip(a, b)) if p != q), None)
    ok = first is not None and first <= 17
    verdict("C4", ok, f"sensitivity: first differing byte index={first} (<= 17)")


def test_c5_no_short_cycles():
    dynamics.detect_cycle("cot2", 1.0, 10)
    t0 = time.perf_counter()
    c = dynamics.detect_cycle("cot2", 1.0, 10**7)
    dt = time.perf_counter() - t0
    ok = not c.found and not c.truncated and dt < 60
    verdict("C5", ok, f"no short cycles: found={c.found} truncated={c.truncated} steps={c.steps} runtime={dt:.2f}s")


def test_c6_chaos_zone_structure():
    rep = dynamics.expansiveness_scan("cot2", 10**4)
    dynamics.escape_check("cot2", rep, 1)
    flat = rep.non_expansive_points
    lows = flat.min() if flat.size else math.nan
    in_zone = flat.size > 0 and bool(np.all(flat > 0.68))
    bad = [e for e in rep.escape
           if not (e.escaped and e.steps == 1 and 0.08 < e.landing < 0.32 and e.landing_slope > 1)]
    landings = [e.landing for e in rep.escape]
    ok = in_zone and len(rep.escape) == flat.size and not bad
    verdict("C6", ok,
            f"chaos zone: {flat.size} non-expansive samples, min x={lows:.4f} (> 0.68: {in_zone}); "
            f"landings in [{min(landings):.3g}, {max(landings):.3g}], "
            f"{len(bad)} outside (0.08, 0.32) or not expanding")


def test_c7_counterexample():
    fp = dynamics.find_fixed_point("inv_sin_sq", 0.2, 1e-10, 10**4)
    rep = dynamics.expansiveness_scan("inv_sin_sq", 10**4)
    dynamics.escape_check("inv_sin_sq", rep, 100)
    stuck = [e.start for e in rep.escape if not e.escaped and abs(e.start - fp.value) <= 0.05]
    ok = fp.converged and abs(fp.value - 0.37) <= 0.05 and len(stuck) > 0
    verdict("C7", ok, f"counterexample: fixed point={fp.value:.6f} after {fp.iterations} iterations, "
                      f"{len(stuck)} no-escape samples within 0.05")


def test_c8_three_cycle():
    c = dynamics.detect_cycle("inv_one_minus_x", 2.0, 100)
    ok = c.found and c.period == 3 and c.start_index == 0
    verdict("C8", ok, f"3-cycle: period={c.period} start={c.start_index}")


def test_c9_density():
    dynamics.iterate_orbit("cot2", 1.0, 10, "fractional")
    t0 = time.perf_counter()
    orbit = dynamics.iterate_orbit("cot2", 1.0, 10**6, "fractional")
    _, empty = dynamics.density_histogram(orbit, 1000)
    dt = time.perf_counter() - t0
    ok = empty == 0 and dt < 10
    verdict("C9", ok, f"density: empty bins={empty}/1000 runtime={dt:.2f}s")


def test_c10_statistical_quality():
    t0 = time.perf_counter()
    data = bytegen.fill(bytegen.seed_from_value(1.0), 100 * 10**6 // 8)
    battery = stats.run_battery(data, alpha=0.01, substreams=100)
    dt = time.perf_counter() - t0
    passes = {t: round(battery.pass_proportion(t) * 100) for t in stats.TEST_NAMES}
    unif = battery.uniformity_p
    ok = (not battery.insufficient and all(v >= 96 for v in passes.values())
          and all(unif[t] >= 1e-4 for t in stats.TEST_NAMES) and dt < 120)
    detail = " ".join(f"{t}={passes[t]}/100,U={unif[t]:.3g}" for t in stats.TEST_NAMES)
    verdict("C10", ok, f"statistics: {detail} runtime={dt:.1f}s")


def test_c11_throughput():
    r = bytegen.benchmark(600 * 10**6, reps=3, seed=1.0)
    ok = r.median_mb_s >= 30
    verdict("C11", ok, f"throughput: median {r.median_mb_s:.1f} MB/s over {len(r.seconds)} reps of 600 MB")


def test_c12_negative_controls():
    n = 10**5
    controls = {
        "zeros": np.zeros(n, dtype=np.uint8),
        "ones": np.ones(n, dtype=np.uint8),
        "alternating": np.tile(np.array([0, 1], dtype=np.uint8), n // 2),
    }
    control_ok = {}
    for name, bits in controls.items():
        p = min(stats.monobit(bits).p_value, stats.serial2(bits).p_value)
        control_ok[name] = p < 1e-15
    counter = bytes(range(256)) * 400
    chi = stats.byte_chi_square(counter)
    mono = stats.monobit(counter)
    counter_ok = chi.p_value == 1.0 and not mono.passed
    ok = all(control_ok.values()) and counter_ok
    verdict("C12", ok, f"negative controls: {control_ok}; counter chi p={chi.p_value} "
                       f"monobit p={mono.p_value} (must fail)")
