"""Command-line front end: compress, decompress, curves, verify, optimal."""

from __future__ import annotations

import argparse
import json
import logging
import os
import string
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import samples
from .analysis import f, loop_analysis, worst_case_curves
from .codec import CodedContainer, ContainerError, DecodeError, decode_array, encode_array, compile_code, pack, unpack
from .construct import best_code
from .core import SourceDistribution, entropy
from .markov import redundancy_report, transition_model
from .search import MAX_K, MAX_M, SearchSpaceError, brute_force_optimal
from .tree import codeword_table, verify_zero_run

log = logging.getLogger("aifv")

MODES = ("huffman-transform", "brute-force")


class CliError(Exception):
    def __init__(self, message, **extra):
        super().__init__(message)
        self.extra = extra


def _fail(command: str, message: str, **extra) -> int:
    payload = {"command": command, "ok": False, "error": message}
    payload.update(extra)
    sys.stderr.write(json.dumps(payload, default=str) + "\n")
    return 1


def _build(dist: SourceDistribution, m: int, mode: str):
    if mode == "brute-force":
        if len(dist) > MAX_K or m > MAX_M:
            raise CliError(f"brute-force mode needs K <= {MAX_K} and m <= {MAX_M}",
                           K=len(dist), m=m)
        code, _ = brute_force_optimal(dist, m)
        return code
    return best_code(dist, m)


def _report(code, dist) -> dict:
    rep = redundancy_report(code, dist)
    return {
        "m": code.m,
        "bits_per_symbol": rep.average_length,
        "entropy": rep.entropy,
        "redundancy": rep.redundancy,
        "stationary": list(rep.stationary),
        "tree_lengths": list(rep.tree_lengths),
    }


def _tables(code) -> list:
    return [{str(s): cw for s, (cw, _) in codeword_table(t).items()} for t in code.trees]


# Subcommands

def cmd_compress(args) -> int:
    data = Path(args.input).read_bytes()
    if not data:
        raise CliError("empty input")
    counts = Counter(data)
    if len(counts) < 2:
        raise CliError("input uses a single byte value; at least two distinct symbols are needed",
                       K=len(counts))
    dist = SourceDistribution.from_counts({bytes([b]): c for b, c in counts.items()})
    code = _build(dist, args.m, args.mode)
    container = pack(code, [bytes([b]) for b in data])
    out = args.out or args.input + ".aifv"
    Path(out).write_bytes(container.to_bytes())
    info = _report(code, dist)
    info.update({
        "command": "compress",
        "ok": True,
        "output": out,
        "symbols": container.symbol_count,
        "payload_bits": container.payload_bit_length,
        "empirical_bits_per_symbol": container.payload_bit_length / container.symbol_count,
    })
    print(json.dumps(info))
    return 0


def cmd_decompress(args) -> int:
    raw = Path(args.input).read_bytes()
    container = CodedContainer.from_bytes(raw)
    syms = unpack(container)
    out = args.out or (args.input[:-5] if args.input.endswith(".aifv") else args.input + ".out")
    Path(out).write_bytes(b"".join(syms))
    print(json.dumps({"command": "decompress", "ok": True, "output": out, "symbols": len(syms)}))
    return 0


def cmd_curves(args) -> int:
    grid = worst_case_curves(args.grid, args.lo, args.hi)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            grid.write_csv(fh)
        log.info("wrote %d rows to %s", len(grid), args.out)
    else:
        grid.write_csv(sys.stdout)
    return 0


def _parse_dist(arg: str, delta: float) -> SourceDistribution:
    text = Path(arg).read_text() if os.path.isfile(arg) else arg
    try:
        vals = [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise CliError(f"cannot parse distribution {arg!r}") from None
    if len(vals) == 1:
        # worst-case three-symbol source (p, 1 - p - delta, delta)
        p = vals[0]
        vals = [p, 1.0 - p - delta, delta]
    names = string.ascii_lowercase if len(vals) <= 26 else None
    symbols = tuple(names[i] if names else f"s{i}" for i in range(len(vals)))
    try:
        return SourceDistribution.from_probs(vals, symbols)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def cmd_verify(args) -> int:
    if args.example:
        code_fn, src_fn = samples.SAMPLES[args.example]
        code = code_fn()
        dist = _parse_dist(args.dist, args.delta) if args.dist else (src_fn() if src_fn else None)
        if dist is None:
            raise CliError(f"example {args.example!r} has no default source; give a distribution")
        dist = SourceDistribution(code.alphabet, dist.probs)
    else:
        if not args.dist:
            raise CliError("verify needs a distribution or --example")
        dist = _parse_dist(args.dist, args.delta)
        code = _build(dist, args.m, args.mode)
    m = code.m
    rng = np.random.default_rng(args.seed)
    checks = {}
    checks["validate"] = not code.violations()
    checks["zero_run"] = verify_zero_run(code)
    cc = compile_code(code)
    seq = rng.choice(len(dist), size=args.length, p=np.asarray(dist.probs))
    idx = np.array([cc.index[s] for s in dist.symbols], dtype=np.int32)[seq]
    bits, trace = encode_array(cc, idx)
    try:
        back, trace2, delay = decode_array(cc, bits, idx.size)
        checks["round_trip"] = bool(np.array_equal(back, idx) and np.array_equal(trace, trace2))
        max_delay = int(delay.max()) if delay.size else 0
        checks["delay_bound"] = max_delay <= m
    except DecodeError as exc:
        log.error("decode failed: %s", exc)
        checks["round_trip"] = False
        checks["delay_bound"] = False
        max_delay = None
    loops = loop_analysis(code, dist, args.delta)
    checks["loops"] = loops.ok
    model = transition_model(code, dist)
    checks["stationary"] = model.residual() <= 1e-10 and abs(model.p.sum() - 1.0) <= 1e-12
    info = _report(code, dist)
    checks["redundancy_nonnegative"] = info["redundancy"] >= -1e-12
    checks = {k: bool(v) for k, v in checks.items()}
    info.update({
        "command": "verify",
        "checks": checks,
        "max_delay": max_delay,
        "transition_matrix": model.R.tolist(),
        "codewords": _tables(code),
        "loop_lower_bound": loops.lower_bound,
    })
    failed = [k for k, v in checks.items() if not v]
    info["ok"] = not failed
    print(json.dumps(info))
    for name, ok in checks.items():
        log.info("%s: %s", name, "pass" if ok else "FAIL")
    if failed:
        return _fail("verify", "checks failed", failed=failed)
    return 0


def cmd_optimal(args) -> int:
    dist = _parse_dist(args.dist, args.delta)
    try:
        code, L = brute_force_optimal(dist, args.m, args.max_depth)
    except SearchSpaceError as exc:
        raise CliError(str(exc)) from None
    H = entropy(dist)
    info = {"command": "optimal", "ok": True, "m": code.m, "average_length": L,
            "entropy": H, "redundancy": L - H, "codewords": _tables(code)}
    if 0.5 <= dist.p_max < 1.0:
        info["f_p_max"] = f(dist.p_max)
    print(json.dumps(info))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aifv", description="Binary AIFV-m codes.")
    sub = ap.add_subparsers(dest="command", required=True)

    def positive(v):
        n = int(v)
        if n < 1:
            raise argparse.ArgumentTypeError("must be >= 1")
        return n

    def code_opts(p):
        p.add_argument("--m", type=positive, default=2, help="number of code trees")
        p.add_argument("--mode", choices=MODES, default="huffman-transform")

    p = sub.add_parser("compress", help="compress a file with an order-0 byte model")
    p.add_argument("input")
    p.add_argument("--out")
    code_opts(p)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="restore a file from a container")
    p.add_argument("input")
    p.add_argument("--out")
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("curves", help="write worst-case redundancy curves as CSV")
    p.add_argument("--grid", type=positive, default=4096)
    p.add_argument("--lo", type=float, default=0.5)
    p.add_argument("--hi", type=float, default=1.0 - 1e-6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("verify", help="build a code and run the structural and coding checks")
    p.add_argument("dist", nargs="?", help="comma-separated probabilities, a file, or one p_max")
    code_opts(p)
    p.add_argument("--example", choices=sorted(samples.SAMPLES), help="check a bundled sample code")
    p.add_argument("--delta", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--length", type=positive, default=10_000, help="random round-trip length")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("optimal", help="exhaustive optimal code for K <= 4, m <= 3")
    p.add_argument("dist")
    p.add_argument("--m", type=positive, default=2)
    p.add_argument("--delta", type=float, default=1e-6)
    p.add_argument("--max-depth", type=positive, default=None)
    p.set_defaults(func=cmd_optimal)
    return ap


def main(argv=None) -> int:
    level = getattr(logging, os.environ.get("AIFV_LOG", "WARNING").upper(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        return _fail(args.command, str(exc), **exc.extra)
    except (ContainerError, DecodeError) as exc:
        return _fail(args.command, str(exc), offset=getattr(exc, "offset", None))
    except ValueError as exc:
        return _fail(args.command, str(exc))
    except OSError as exc:
        return _fail(args.command, f"I/O error: {exc}")


if __name__ == "__main__":
    sys.exit(main())
