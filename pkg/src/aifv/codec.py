"""AIFV-m encoder/decoder, decoding-delay measurement and the container format."""

from __future__ import annotations

import struct
import weakref
from dataclasses import dataclass

import numpy as np

from . import kernels
from .tree import AifvCode, classify, deserialize_tree, serialize_tree, walk


class DecodeError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (bit offset {offset})")
        self.offset = offset


class ContainerError(ValueError):
    pass


@dataclass(eq=False)
class CompiledCode:
    """Flat array form of a code used by the kernels."""

    code: AifvCode
    index: dict  # symbol -> int
    root: np.ndarray
    c0: np.ndarray
    c1: np.ndarray
    nsym: np.ndarray
    ndeg: np.ndarray
    cw_off: np.ndarray
    cw_len: np.ndarray
    cw_bits: np.ndarray
    nxt: np.ndarray

    @property
    def m(self) -> int:
        return self.code.m

    def symbol_indices(self, sequence) -> np.ndarray:
        try:
            return np.fromiter((self.index[s] for s in sequence), dtype=np.int32)
        except KeyError as exc:
            raise ValueError(f"unknown symbol {exc.args[0]!r}") from None


_compiled = weakref.WeakKeyDictionary()


def compile_code(code: AifvCode) -> CompiledCode:
    hit = _compiled.get(code)
    if hit is not None:
        return hit
    index = {s: i for i, s in enumerate(code.alphabet)}
    K, m = len(index), code.m
    c0, c1, nsym, ndeg, root = [], [], [], [], []
    for tree in code.trees:
        ids = {}
        order = list(walk(tree))
        for path, node in order:
            ids[id(node)] = len(c0)
            c0.append(-1)
            c1.append(-1)
            nsym.append(-1)
            ndeg.append(-1)
        root.append(ids[id(tree)])
        for path, node in order:
            n = ids[id(node)]
            if node.child0 is not None:
                c0[n] = ids[id(node.child0)]
            if node.child1 is not None:
                c1[n] = ids[id(node.child1)]
            kind, k = classify(node, path)
            if k is not None:
                if node.symbol not in index:
                    raise ValueError(f"tree symbol {node.symbol!r} not in alphabet")
                nsym[n] = index[node.symbol]
                ndeg[n] = k
    cw_off = np.zeros((m, K), dtype=np.int64)
    cw_len = np.full((m, K), -1, dtype=np.int32)
    nxt = np.zeros((m, K), dtype=np.int32)
    flat = []
    for t, table in enumerate(code.tables):
        for s, (cw, deg) in table.items():
            j = index[s]
            cw_off[t, j] = len(flat)
            cw_len[t, j] = len(cw)
            nxt[t, j] = deg
            flat.extend(1 if ch == "1" else 0 for ch in cw)
    if (cw_len < 0).any():
        t, j = np.argwhere(cw_len < 0)[0]
        raise ValueError(f"symbol {code.alphabet[j]!r} missing from T_{t}")
    cc = CompiledCode(
        code, index,
        np.asarray(root, dtype=np.int32), np.asarray(c0, dtype=np.int32),
        np.asarray(c1, dtype=np.int32), np.asarray(nsym, dtype=np.int32),
        np.asarray(ndeg, dtype=np.int32), cw_off, cw_len,
        np.asarray(flat, dtype=np.uint8), nxt,
    )
    _compiled[code] = cc
    return cc


def encode_array(cc: CompiledCode, syms: np.ndarray):
    """Encode symbol indices; returns (bit array uint8, trace int32)."""
    syms = np.ascontiguousarray(syms, dtype=np.int32)
    n = kernels.encoded_length(syms, cc.cw_len, cc.nxt)
    out = np.empty(n, dtype=np.uint8)
    trace = np.empty(syms.size, dtype=np.int32)
    kernels.encode_into(syms, cc.cw_off, cc.cw_len, cc.cw_bits, cc.nxt, out, trace)
    return out, trace


def decode_array(cc: CompiledCode, bits: np.ndarray, count: int):
    """Decode ``count`` symbols; returns (symbol indices, trace, per-symbol delay)."""
    bits = np.ascontiguousarray(bits, dtype=np.uint8)
    syms = np.empty(count, dtype=np.int32)
    trace = np.empty(count, dtype=np.int32)
    delay = np.empty(count, dtype=np.int32)
    status, pos, done = kernels.decode_into(
        bits, bits.size, count, cc.root, cc.c0, cc.c1, cc.nsym, cc.ndeg, syms, trace, delay
    )
    if status == kernels.ERR_CORRUPT:
        if pos >= bits.size:
            raise DecodeError(f"stream ended after {done} of {count} symbols", pos)
        raise DecodeError(f"no master node to commit for symbol {done}", pos)
    if status == kernels.ERR_TRAILING:
        raise DecodeError(f"{bits.size - pos} unused bits after {count} symbols", pos)
    return syms, trace, delay


def _bit_array(bits: str) -> np.ndarray:
    arr = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
    if arr.size and arr.max() > 1:
        raise ValueError("bit string may only contain '0' and '1'")
    return arr


def encode(code: AifvCode, sequence):
    """Encode a symbol sequence; returns (bit string, list of tree indices used)."""
    cc = compile_code(code)
    bits, trace = encode_array(cc, cc.symbol_indices(sequence))
    return (bits + ord("0")).tobytes().decode("ascii"), trace.tolist()


def decode(code: AifvCode, bits: str, symbol_count: int):
    """Decode exactly ``symbol_count`` symbols; returns (symbols, trace)."""
    cc = compile_code(code)
    syms, trace, _ = decode_array(cc, _bit_array(bits), symbol_count)
    alphabet = code.alphabet
    return [alphabet[i] for i in syms], trace.tolist()


def decode_delays(code: AifvCode, sequence) -> list:
    """Per symbol: bits read past the end of its codeword before it was committed."""
    cc = compile_code(code)
    bits, _ = encode_array(cc, cc.symbol_indices(sequence))
    _, _, delay = decode_array(cc, bits, len(sequence))
    return delay.tolist()


def measure_delay(code: AifvCode, sequence) -> int:
    d = decode_delays(code, sequence)
    return max(d) if d else 0


class StreamDecoder:
    """Incremental decoder: feed bit strings, get committed symbols back.

    A symbol is committed only once its trace has failed, so up to m bits of
    look-ahead are held back until more input arrives or ``finish`` is called.
    """

    def __init__(self, code: AifvCode, symbol_count: int):
        self.code = code
        self.cc = compile_code(code)
        self.remaining = symbol_count
        self.tree = 0
        self.trace = []
        self._buf = bytearray()
        self._pos = 0  # absolute bit offset of _buf[0]
        self._closed = False

    @property
    def position(self) -> int:
        return self._pos

    def feed(self, bits: str) -> list:
        if self._closed:
            raise RuntimeError("decoder already finished")
        self._buf += _bit_array(bits).tobytes()
        return self._drain()

    def feed_bytes(self, data: bytes, nbits: int | None = None) -> list:
        arr = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
        if nbits is not None:
            arr = arr[:nbits]
        self._buf += arr.tobytes()
        return self._drain()

    def finish(self) -> list:
        self._closed = True
        out = self._drain()
        if self.remaining:
            raise DecodeError(f"stream ended with {self.remaining} symbols missing", self._pos + len(self._buf))
        if self._buf:
            raise DecodeError(f"{len(self._buf)} unused bits after last symbol", self._pos)
        return out

    def _drain(self) -> list:
        cc = self.cc
        out = []
        buf = self._buf
        while self.remaining:
            node = cc.root[self.tree]
            p = 0
            cand = -1
            cand_end = 0
            waiting = False
            while True:
                d = cc.ndeg[node]
                if d >= 0:
                    cand, cand_end = node, p
                    if d == 0:
                        break
                if p >= len(buf):
                    waiting = not self._closed
                    break
                nx = cc.c1[node] if buf[p] else cc.c0[node]
                p += 1
                if nx < 0:
                    break
                node = nx
                if cand >= 0 and p - cand_end > cc.ndeg[cand]:
                    cand = -1
            if waiting:
                break
            if cand < 0:
                if p >= len(buf):
                    raise DecodeError("stream ended inside a codeword", self._pos + p)
                raise DecodeError("no master node to commit", self._pos + p)
            out.append(self.code.alphabet[cc.nsym[cand]])
            self.trace.append(self.tree)
            self.tree = int(cc.ndeg[cand])
            del buf[:cand_end]
            self._pos += cand_end
            self.remaining -= 1
        return out


MAGIC = b"AIFV"
VERSION = 1


def _symbol_bytes(sym) -> bytes:
    if isinstance(sym, bytes):
        return sym
    if isinstance(sym, str):
        return sym.encode("utf-8")
    if isinstance(sym, int) and 0 <= sym < 256:
        return bytes([sym])
    raise ContainerError(f"symbol {sym!r} has no byte representation")


@dataclass(eq=False)
class CodedContainer:
    """Self-describing coded stream: code trees, exact symbol count and payload."""

    code: AifvCode
    symbol_count: int
    payload_bit_length: int
    payload: bytes

    def to_bytes(self) -> bytes:
        code = self.code
        if code.m > 255 or len(code.alphabet) > 0xFFFF:
            raise ContainerError("code too large for container header")
        out = bytearray(MAGIC)
        out += struct.pack(">BBH", VERSION, code.m, len(code.alphabet))
        for sym in code.alphabet:
            raw = _symbol_bytes(sym)
            out += struct.pack(">H", len(raw)) + raw
        for tree in code.trees:
            blob = serialize_tree(tree, code.alphabet)
            out += struct.pack(">I", len(blob)) + blob
        out += struct.pack(">QQ", self.symbol_count, self.payload_bit_length)
        out += self.payload
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes, text: bool = False) -> "CodedContainer":
        """Parse a container; symbols come back as bytes, or str when ``text``."""
        try:
            return cls._parse(memoryview(data), text)
        except struct.error as exc:
            raise ContainerError(f"truncated container: {exc}") from None

    @classmethod
    def _parse(cls, buf, text):
        if bytes(buf[:4]) != MAGIC:
            raise ContainerError("bad magic")
        version, m, K = struct.unpack_from(">BBH", buf, 4)
        if version != VERSION:
            raise ContainerError(f"unsupported version {version}")
        if m < 1 or K < 2:
            raise ContainerError(f"bad header: m={m}, K={K}")
        pos = 8
        alphabet = []
        for _ in range(K):
            (n,) = struct.unpack_from(">H", buf, pos)
            raw = bytes(buf[pos + 2:pos + 2 + n])
            if len(raw) != n:
                raise ContainerError("truncated symbol table")
            alphabet.append(raw.decode("utf-8") if text else raw)
            pos += 2 + n
        if len(set(alphabet)) != K:
            raise ContainerError("duplicate symbols in table")
        trees = []
        for i in range(m):
            (n,) = struct.unpack_from(">I", buf, pos)
            blob = bytes(buf[pos + 4:pos + 4 + n])
            if len(blob) != n:
                raise ContainerError(f"truncated tree T_{i}")
            try:
                trees.append(deserialize_tree(blob, alphabet))
            except ValueError as exc:
                raise ContainerError(f"tree T_{i}: {exc}") from None
            pos += 4 + n
        code = AifvCode(tuple(trees), tuple(alphabet))
        bad = code.violations()
        if bad:
            i, v = bad[0]
            raise ContainerError(f"tree T_{i} invalid: {v}")
        count, nbits = struct.unpack_from(">QQ", buf, pos)
        pos += 16
        payload = bytes(buf[pos:])
        if len(payload) != (nbits + 7) // 8:
            raise ContainerError(
                f"payload has {len(payload)} bytes but bit length {nbits} needs {(nbits + 7) // 8}"
            )
        if nbits % 8 and payload[-1] & ((1 << (8 - nbits % 8)) - 1):
            raise ContainerError("nonzero padding bits after payload")
        return cls(code, count, nbits, payload)


def pack(code: AifvCode, sequence) -> CodedContainer:
    cc = compile_code(code)
    syms = cc.symbol_indices(sequence)
    bits, _ = encode_array(cc, syms)
    payload = np.packbits(bits).tobytes() if bits.size else b""
    return CodedContainer(code, int(syms.size), int(bits.size), payload)


def unpack(container: CodedContainer) -> list:
    cc = compile_code(container.code)
    nbits = container.payload_bit_length
    if len(container.payload) != (nbits + 7) // 8:
        raise ContainerError("payload length does not match payload_bit_length")
    bits = np.unpackbits(np.frombuffer(container.payload, dtype=np.uint8))[:nbits]
    syms, _, _ = decode_array(cc, bits, container.symbol_count)
    alphabet = container.code.alphabet
    return [alphabet[i] for i in syms]

