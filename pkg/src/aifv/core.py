"""Source distributions, entropy helpers and MSB-first bit I/O."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

MIN_PROB = 1e-12
SUM_TOL = 1e-12

# Bit strings are plain ``str`` objects over {'0', '1'}; '' is the null codeword.
BitString = str


def binary_entropy(x):
    """Binary entropy h(x) in bits. Accepts scalars or arrays."""
    arr = np.asarray(x, dtype=float)
    if np.any((arr < 0.0) | (arr > 1.0)) or np.any(np.isnan(arr)):
        raise ValueError(f"binary_entropy defined on [0, 1], got {x!r}")
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(arr > 0.0, -arr * np.log2(np.where(arr > 0.0, arr, 1.0)), 0.0)
        b = np.where(arr < 1.0, -(1.0 - arr) * np.log2(np.where(arr < 1.0, 1.0 - arr, 1.0)), 0.0)
    out = a + b
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class SourceDistribution:
    """An i.i.d. source: ordered symbols with strictly positive probabilities."""

    symbols: tuple
    probs: tuple

    def __post_init__(self):
        syms = tuple(self.symbols)
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "symbols", syms)
        object.__setattr__(self, "probs", probs)
        if len(syms) != len(probs):
            raise ValueError("symbols and probs differ in length")
        if len(syms) < 2:
            raise ValueError(f"alphabet size must be at least 2, got {len(syms)}")
        if len(set(syms)) != len(syms):
            raise ValueError("duplicate symbols in alphabet")
        for s, p in zip(syms, probs):
            if not (p >= MIN_PROB) or p > 1.0:
                raise ValueError(f"probability of {s!r} out of range: {p!r}")
        total = math.fsum(probs)
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    @classmethod
    def from_probs(cls, probs: Sequence[float], symbols: Sequence[Hashable] | None = None,
                   normalize: bool = False) -> "SourceDistribution":
        probs = [float(p) for p in probs]
        if normalize:
            total = math.fsum(probs)
            probs = [p / total for p in probs]
        if symbols is None:
            symbols = range(len(probs))
        return cls(tuple(symbols), tuple(probs))

    @classmethod
    def from_counts(cls, counts: dict) -> "SourceDistribution":
        """Order-0 model from symbol counts; zero counts are dropped."""
        items = sorted((s, c) for s, c in counts.items() if c > 0)
        n = sum(c for _, c in items)
        if n == 0:
            raise ValueError("no symbols counted")
        return cls(tuple(s for s, _ in items), tuple(c / n for _, c in items))

    @classmethod
    def from_sequence(cls, seq: Iterable[Hashable]) -> "SourceDistribution":
        return cls.from_counts(Counter(seq))

    def __len__(self):
        return len(self.symbols)

    @property
    def p_max(self) -> float:
        return max(self.probs)

    @property
    def most_likely(self):
        return self.symbols[int(np.argmax(self.probs))]

    def prob(self, symbol) -> float:
        return self.probs[self.symbols.index(symbol)]

    def as_dict(self) -> dict:
        return dict(zip(self.symbols, self.probs))


def entropy(dist: SourceDistribution) -> float:
    return math.fsum(-p * math.log2(p) for p in dist.probs)


def bits_to_bytes(bits: str) -> bytes:
    """Pack a '0'/'1' string MSB-first, zero padding the final byte."""
    if not bits:
        return b""
    arr = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
    return np.packbits(arr).tobytes()


def bytes_to_bits(data: bytes, nbits: int | None = None) -> str:
    arr = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    if nbits is not None:
        if nbits > arr.size:
            raise ValueError(f"{nbits} bits requested from {arr.size}-bit buffer")
        arr = arr[:nbits]
    return (arr + ord("0")).tobytes().decode("ascii")


class BitWriter:
    """Accumulates bits MSB-first within each byte."""

    def __init__(self):
        self._buf = bytearray()
        self._acc = 0
        self._nacc = 0
        self.position = 0

    def write_bit(self, bit: int):
        self._acc = (self._acc << 1) | (1 if bit else 0)
        self._nacc += 1
        self.position += 1
        if self._nacc == 8:
            self._buf.append(self._acc)
            self._acc = 0
            self._nacc = 0

    def write_bits(self, value: int, n: int):
        for shift in range(n - 1, -1, -1):
            self.write_bit((value >> shift) & 1)

    def write(self, bits: str):
        for ch in bits:
            if ch == "1":
                self.write_bit(1)
            elif ch == "0":
                self.write_bit(0)
            else:
                raise ValueError(f"not a bit: {ch!r}")

    def getvalue(self) -> bytes:
        if self._nacc:
            return bytes(self._buf) + bytes([self._acc << (8 - self._nacc)])
        return bytes(self._buf)

    def __len__(self):
        return self.position


class BitReader:
    """Reads MSB-first bits, never past the declared payload length."""

    def __init__(self, data: bytes, nbits: int | None = None):
        if nbits is None:
            nbits = 8 * len(data)
        if nbits > 8 * len(data):
            raise ValueError(f"declared {nbits} bits but buffer holds {8 * len(data)}")
        self._data = data
        self.nbits = nbits
        self.position = 0

    @property
    def remaining(self) -> int:
        return self.nbits - self.position

    def read_bit(self) -> int:
        if self.position >= self.nbits:
            raise EOFError(f"read past end of {self.nbits}-bit payload")
        byte = self._data[self.position >> 3]
        bit = (byte >> (7 - (self.position & 7))) & 1
        self.position += 1
        return bit

    def read_bits(self, n: int) -> int:
        value = 0
        for _ in range(n):
            value = (value << 1) | self.read_bit()
        return value

    def peek_bit(self) -> int | None:
        if self.position >= self.nbits:
            return None
        byte = self._data[self.position >> 3]
        return (byte >> (7 - (self.position & 7))) & 1

    def seek(self, position: int):
        if not 0 <= position <= self.nbits:
            raise ValueError(f"seek to {position} outside [0, {self.nbits}]")
        self.position = position

    def read(self, n: int) -> str:
        return "".join("1" if self.read_bit() else "0" for _ in range(n))
