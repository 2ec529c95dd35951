"""Array kernels for encoding, decoding and tree-chain simulation.

Kernels are written in the numba-compatible subset of Python. They are
compiled with ``numba.njit`` unless numba is missing or the environment
variable ``AIFV_DISABLE_JIT`` is set to a non-empty value other than ``0``,
in which case the same functions run as plain Python over numpy arrays.
"""

import os

import numpy as np

_flag = os.environ.get("AIFV_DISABLE_JIT", "")
JIT_REQUESTED = _flag in ("", "0")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAS_NUMBA = numba is not None and JIT_REQUESTED


def jit(func):
    if HAS_NUMBA:
        return numba.njit(cache=True, nogil=True)(func)
    return func


def pure(kernel):
    """The uncompiled Python function behind a kernel."""
    return getattr(kernel, "py_func", kernel)


# decoder status codes
OK = 0
ERR_CORRUPT = 1  # trace stopped with no master to commit
ERR_TRAILING = 2  # bits left after the last symbol


@jit
def encoded_length(syms, cw_len, nxt):
    t = 0
    total = 0
    for i in range(syms.size):
        s = syms[i]
        total += cw_len[t, s]
        t = nxt[t, s]
    return total


@jit
def encode_into(syms, cw_off, cw_len, cw_bits, nxt, out_bits, trace):
    t = 0
    pos = 0
    for i in range(syms.size):
        s = syms[i]
        trace[i] = t
        off = cw_off[t, s]
        n = cw_len[t, s]
        for j in range(n):
            out_bits[pos + j] = cw_bits[off + j]
        pos += n
        t = nxt[t, s]
    return pos


@jit
def decode_into(bits, nbits, count, root, c0, c1, nsym, ndeg, out_syms, out_trace, out_delay):
    """Decode ``count`` symbols. Returns (status, bit position, symbols done)."""
    t = 0
    pos = 0
    for i in range(count):
        node = root[t]
        p = pos
        cand = -1
        cand_end = 0
        while True:
            d = ndeg[node]
            if d >= 0:
                cand = node
                cand_end = p
                if d == 0:
                    break
            if p >= nbits:
                break
            if bits[p] == 1:
                nx = c1[node]
            else:
                nx = c0[node]
            p += 1
            if nx < 0:
                break
            node = nx
            if cand >= 0 and p - cand_end > ndeg[cand]:
                cand = -1
        if cand < 0:
            return ERR_CORRUPT, p, i
        out_syms[i] = nsym[cand]
        out_trace[i] = t
        out_delay[i] = p - cand_end
        pos = cand_end
        t = ndeg[cand]
    if pos != nbits:
        return ERR_TRAILING, pos, count
    return OK, pos, count


@jit
def simulate_chain(syms, cw_len, nxt, m, nbatch):
    """Bits emitted and tree visits per batch for an i.i.d. symbol stream."""
    n = syms.size
    per = n // nbatch
    bits = np.zeros(nbatch, dtype=np.int64)
    visits = np.zeros((nbatch, m), dtype=np.int64)
    t = 0
    for b in range(nbatch):
        for i in range(b * per, (b + 1) * per):
            s = syms[i]
            visits[b, t] += 1
            bits[b] += cw_len[t, s]
            t = nxt[t, s]
    return bits, visits
