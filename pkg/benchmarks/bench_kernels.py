#!/usr/bin/env python3
"""Time the compiled kernels against their plain-Python versions.

Both paths run the same function bodies (``kernels.pure`` returns the
uncompiled one), so outputs are checked for equality before timing.
Run with AIFV_DISABLE_JIT=1 to confirm the library falls back cleanly;
the comparison then reports a speedup of about 1.
"""

import argparse
import time

import numpy as np

from aifv import kernels
from aifv.codec import compile_code
from aifv.construct import build_aifvm, random_code
from aifv.core import SourceDistribution


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def encode_fn(k_len, k_enc, cc, syms):
    def run():
        n = k_len(syms, cc.cw_len, cc.nxt)
        bits = np.empty(n, dtype=np.uint8)
        trace = np.empty(syms.size, dtype=np.int32)
        k_enc(syms, cc.cw_off, cc.cw_len, cc.cw_bits, cc.nxt, bits, trace)
        return bits, trace
    return run


def decode_fn(k_dec, cc, bits, count):
    def run():
        out = [np.empty(count, dtype=np.int32) for _ in range(3)]
        status = k_dec(bits, bits.size, count, cc.root, cc.c0, cc.c1, cc.nsym, cc.ndeg, *out)
        return status, out
    return run


def simulate_fn(k_sim, cc, syms):
    return lambda: k_sim(syms, cc.cw_len, cc.nxt, cc.m, 100)


def same(a, b):
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    if isinstance(a, (tuple, list)):
        return len(a) == len(b) and all(same(x, y) for x, y in zip(a, b))
    return a == b


def bench_code(label, code, probs, n, repeat, rng):
    cc = compile_code(code)
    syms = rng.choice(len(code.alphabet), size=n, p=probs).astype(np.int32)
    bits, _ = encode_fn(kernels.encoded_length, kernels.encode_into, cc, syms)()
    P = kernels.pure
    jobs = {
        "encode": (encode_fn(kernels.encoded_length, kernels.encode_into, cc, syms),
                   encode_fn(P(kernels.encoded_length), P(kernels.encode_into), cc, syms)),
        "decode": (decode_fn(kernels.decode_into, cc, bits, n),
                   decode_fn(P(kernels.decode_into), cc, bits, n)),
        "simulate": (simulate_fn(kernels.simulate_chain, cc, syms),
                     simulate_fn(P(kernels.simulate_chain), cc, syms)),
    }
    rows = []
    for op, (fast, slow) in jobs.items():
        fast()  # compile outside the timed region
        tf, a = best_of(fast, repeat)
        ts, b = best_of(slow, 1)
        if not same(a, b):
            raise SystemExit(f"{label} {op}: compiled and pure outputs differ")
        rows.append((label, op, n, tf, ts))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000, help="symbols per run")
    ap.add_argument("--repeat", type=int, default=5, help="timed runs of the compiled path")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)

    skew = SourceDistribution(("a", "b", "c"), (0.9, 0.09, 0.01))
    wide = random_code(16, 3, rng)
    wide_probs = rng.dirichlet(np.ones(16))
    cases = [
        ("chain m=4, K=3", build_aifvm(skew, 4), np.asarray(skew.probs)),
        ("random m=3, K=16", wide, wide_probs),
    ]
    print(f"numba compiled: {kernels.HAS_NUMBA}")
    print(f"{'code':<18} {'kernel':<9} {'n':>8} {'compiled s':>11} {'python s':>10} {'speedup':>8}")
    for label, code, probs in cases:
        for label, op, n, tf, ts in bench_code(label, code, probs, args.n, args.repeat, rng):
            print(f"{label:<18} {op:<9} {n:>8} {tf:>11.4f} {ts:>10.4f} {ts / tf:>8.1f}")


if __name__ == "__main__":
    main()
