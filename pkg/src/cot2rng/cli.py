"""Command-line front end.

Machine-readable output (raw bytes, CSV or JSON) goes to ``--out`` or
stdout; a one-line human summary goes to stderr. Exit status is 0 on
success, 1 when a statistical check fails and 2 on usage or data errors.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import math
import sys
import time
from dataclasses import dataclass
from typing import Optional

from . import bytegen, dynamics, stats
from .map_core import MapId, get_map

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_FORMATS = {
    "gen": ("raw",),
    "orbit": ("csv", "json"),
    "analyze": ("csv", "json"),
    "test": ("json", "text"),
    "bench": ("json",),
}


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    subcommand: str
    seed: Optional[float]
    map_id: str
    n: int
    out_path: Optional[str]
    format: str

    def __post_init__(self):
        allowed = _FORMATS[self.subcommand]
        if self.format not in allowed:
            raise UsageError(f"{self.subcommand} supports --format {'/'.join(allowed)}, not {self.format}")


def parse_seed(text: Optional[str]) -> Optional[float]:
    """``time`` (or nothing) means clock seeding; hex floats and decimals are accepted."""
    if text is None or text == "time":
        return None
    try:
        if "0x" in text.lower():
            return float.fromhex(text)
        return float(text)
    except ValueError:
        raise UsageError(f"cannot parse seed {text!r}") from None


def _summary(msg: str):
    print(msg, file=sys.stderr)


@contextlib.contextmanager
def _open_out(path: Optional[str], binary: bool = False):
    if path is None or path == "-":
        yield sys.stdout.buffer if binary else sys.stdout
        return
    mode = "wb" if binary else "w"
    kw = {} if binary else {"newline": ""}
    with open(path, mode, **kw) as fh:
        yield fh


def _state(seed: Optional[float]) -> bytegen.GeneratorState:
    try:
        return bytegen.seed_from_time() if seed is None else bytegen.seed_from_value(seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_gen(args) -> int:
    cfg = CliConfig("gen", parse_seed(args.seed), "cot2", args.n, args.out, args.format or "raw")
    if cfg.n < 1:
        raise UsageError("--n must be >= 1")
    if cfg.out_path is None:
        raise UsageError("gen needs --out (use - for stdout)")
    state = _state(cfg.seed)
    t0 = time.perf_counter()
    with _open_out(cfg.out_path, binary=True) as fh:
        for chunk in bytegen.stream(state, cfg.n):
            fh.write(chunk)
    dt = time.perf_counter() - t0
    rate = cfg.n / dt / 1e6 if dt > 0 else math.inf
    _summary(f"seed={state.seed.hex()} bytes={cfg.n} seconds={dt:.3f} MB/s={rate:.1f}")
    return EXIT_OK


def _map_from_args(args):
    try:
        return get_map(args.map, slope=args.slope)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_orbit(args) -> int:
    cfg = CliConfig("orbit", parse_seed(args.seed), args.map, args.n, args.out, args.format or "csv")
    if cfg.seed is None:
        raise UsageError("orbit needs an explicit --seed")
    pmap = _map_from_args(args)
    try:
        orbit = dynamics.iterate_orbit(pmap, cfg.seed, cfg.n, args.mode)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if len(orbit) == 1 and orbit.truncated:
        raise UsageError(f"seed {cfg.seed!r} is singular for {pmap.id.value}")
    with _open_out(cfg.out_path) as fh:
        if cfg.format == "csv":
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("index", "x"))
            w.writerows((i, repr(float(x))) for i, x in enumerate(orbit.points))
        else:
            json.dump({
                "map": orbit.map_id,
                "mode": orbit.mode.value,
                "seed": cfg.seed.hex(),
                "truncated": orbit.truncated,
                "points": [float(x) for x in orbit.points],
            }, fh)
            fh.write("\n")
    _summary(f"map={pmap.id.value} mode={orbit.mode.value} seed={cfg.seed.hex()} "
             f"points={len(orbit)} truncated={orbit.truncated}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = CliConfig("analyze", None, args.map, args.n, args.out, args.format or "json")
    pmap = _map_from_args(args)
    try:
        report = dynamics.expansiveness_scan(pmap, cfg.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    dynamics.escape_check(pmap, report, args.max_steps)
    with _open_out(cfg.out_path) as fh:
        if cfg.format == "csv":
            csv.writer(fh, lineterminator="\n").writerows(report.rows())
        else:
            json.dump(report.summary(), fh, indent=1)
            fh.write("\n")
    stuck = sum(not e.escaped for e in report.escape)
    _summary(f"map={pmap.id.value} grid={cfg.n} min_slope={report.min_slope:.6g} "
             f"non_expansive_intervals={len(report.non_expansive_intervals)} "
             f"samples={len(report.escape)} no_escape={stuck}")
    return EXIT_OK


def cmd_test(args) -> int:
    cfg = CliConfig("test", parse_seed(args.seed), "cot2", args.n, args.out, args.format or "text")
    if args.input:
        try:
            with open(args.input, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {args.input}: {exc}") from None
        source = args.input
    else:
        if cfg.n < 1:
            raise UsageError("give --in FILE or --n BYTES to generate")
        state = _state(cfg.seed)
        data = bytegen.fill(state, cfg.n)
        source = f"cot2 seed={state.seed.hex()}"
    battery = stats.run_battery(data, alpha=args.alpha, substreams=args.substreams,
                                block_length=args.blocklen)
    with _open_out(cfg.out_path) as fh:
        fh.write(battery.to_json() if cfg.format == "json" else battery.to_table())
        fh.write("\n")
    if battery.insufficient:
        _summary(f"{source}: insufficient data for {len(battery.errors)} test run(s); "
                 f"{battery.errors[0][2]}")
        return EXIT_USAGE
    ok = battery.within_band()
    lo, hi = stats.proportion_band(args.alpha, args.substreams)
    _summary(f"{source}: {len(data)} bytes, {args.substreams} substream(s), "
             f"band [{lo:.4f}, {hi:.4f}]: {'PASSED' if ok else 'FAILED'}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_bench(args) -> int:
    cfg = CliConfig("bench", parse_seed(args.seed), "cot2", args.n, args.out, args.format or "json")
    try:
        result = bytegen.benchmark(cfg.n, reps=args.reps, seed=cfg.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with _open_out(cfg.out_path) as fh:
        json.dump({
            "n_bytes": result.n_bytes,
            "seconds": result.seconds,
            "mb_per_s": result.rates,
            "median_mb_per_s": result.median_mb_s,
        }, fh)
        fh.write("\n")
    _summary(f"bytes={cfg.n} reps={args.reps} median MB/s={result.median_mb_s:.1f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cot2rng", description="cot^2 chaotic byte generator and analysis tools")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, n_default, map_flags=False):
        sp.add_argument("--seed", default=None, help='hex float, decimal or "time"')
        sp.add_argument("--n", type=int, default=n_default)
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        sp.add_argument("--format", default=None)
        if map_flags:
            sp.add_argument("--map", default="cot2", choices=[m.value for m in MapId])
            sp.add_argument("--slope", type=float, default=None, help="sawtooth slope m")

    g = sub.add_parser("gen", help="write raw random bytes")
    common(g, 10**6)
    g.set_defaults(func=cmd_gen)

    o = sub.add_parser("orbit", help="export an orbit as CSV/JSON")
    common(o, 10**4, map_flags=True)
    o.add_argument("--mode", default="fractional", choices=[m.value for m in dynamics.Mode])
    o.set_defaults(func=cmd_orbit)

    a = sub.add_parser("analyze", help="derivative scan and escape check")
    common(a, 10**4, map_flags=True)
    a.add_argument("--max-steps", type=int, default=100)
    a.set_defaults(func=cmd_analyze)

    t = sub.add_parser("test", help="run the statistical battery")
    common(t, 0)
    t.add_argument("--in", dest="input", default=None)
    t.add_argument("--alpha", type=float, default=stats.DEFAULT_ALPHA)
    t.add_argument("--substreams", type=int, default=1)
    t.add_argument("--blocklen", type=int, default=stats.DEFAULT_BLOCK_LENGTH)
    t.set_defaults(func=cmd_test)

    b = sub.add_parser("bench", help="generation throughput")
    common(b, 60 * 10**6)
    b.add_argument("--reps", type=int, default=3)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        _summary(f"error: {exc}")
        return EXIT_USAGE
    except OSError as exc:
        _summary(f"error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
