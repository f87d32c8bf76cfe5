"""Binary illumination pattern generators.

The M-sequence generator is a 64-bit Fibonacci LFSR that advances 64
steps per update; with a 32-pixel-wide image one update fills two rows.
LCG and Mersenne Twister streams exist for comparison runs.

Register convention: tap position ``p`` (1..64) lives in integer bit
``p - 1``. Each step shifts toward position 64, emits the old position-64
bit, and feeds the XOR of the tapped positions into position 1.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from . import _kernels
from .core import DimensionError, GhostImagingError, Pattern

MASK64 = (1 << 64) - 1
DEFAULT_TAPS = (64, 63, 61, 60)
DEFAULT_SEED = 0x1
LCG_MULTIPLIER = 6364136223846793005
LCG_INCREMENT = 1442695040888963407

KINDS = ("mseq", "lcg", "mt")

# 2**64 - 1 = 3 * 5 * 17 * 257 * 641 * 65537 * 6700417
_ORDER_FACTORS = (3, 5, 17, 257, 641, 65537, 6700417)


class ZeroStateError(GhostImagingError, ValueError):
    kind = "zero-state"


class DescriptorError(GhostImagingError, ValueError):
    kind = "descriptor"


# ---------------------------------------------------------------------------
# GF(2) helpers

def _gf2_mulmod(a: int, b: int, poly: int, degree: int) -> int:
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a >> degree & 1:
            a ^= poly
    return result


def _gf2_powmod(base: int, e: int, poly: int, degree: int) -> int:
    result = 1
    while e:
        if e & 1:
            result = _gf2_mulmod(result, base, poly, degree)
        base = _gf2_mulmod(base, base, poly, degree)
        e >>= 1
    return result


def feedback_polynomial(taps) -> int:
    """Characteristic polynomial x^64 + sum x^(64-p) as an int bitmask."""
    poly = 1 << 64
    for p in taps:
        poly ^= 1 << (64 - p)
    return poly


@functools.lru_cache(maxsize=None)
def is_maximal_length(taps: Tuple[int, ...]) -> bool:
    """True if the tap set gives period 2**64 - 1 (primitive polynomial)."""
    if 64 not in taps:
        return False
    poly = feedback_polynomial(taps)
    order = MASK64
    if _gf2_powmod(2, order, poly, 64) != 1:
        return False
    return all(_gf2_powmod(2, order // q, poly, 64) != 1 for q in _ORDER_FACTORS)


def _reverse64(v: int) -> int:
    return int(f"{v:064b}"[::-1], 2)


def _offsets(taps) -> np.ndarray:
    return np.array(sorted(64 - p for p in taps), dtype=np.int64)


def _leap_passes(taps) -> int:
    # new bit k reads bit k + (64 - p); bits already settled after each pass
    return -(-64 // min(taps))


# ---------------------------------------------------------------------------
# LFSR

@dataclass(frozen=True)
class LfsrState:
    state: int
    taps: Tuple[int, ...] = DEFAULT_TAPS

    def __post_init__(self):
        taps = tuple(sorted(set(int(t) for t in self.taps), reverse=True))
        if not taps or taps[0] != 64 or taps[-1] < 1:
            raise ValueError(f"taps must lie in 1..64 and include 64, got {self.taps}")
        object.__setattr__(self, "taps", taps)
        if not 0 <= self.state <= MASK64:
            raise ValueError("LFSR state must fit in 64 bits")
        if self.state == 0:
            raise ZeroStateError("the all-zero LFSR state is absorbing")


def lfsr_step(s: LfsrState) -> tuple[LfsrState, int]:
    """Shift once. Returns the new state and the emitted (old position-64) bit."""
    state = s.state
    if state == 0:
        raise ZeroStateError("the all-zero LFSR state is absorbing")
    out = state >> 63
    fb = 0
    for p in s.taps:
        fb ^= state >> (p - 1)
    state = ((state << 1) | (fb & 1)) & MASK64
    return LfsrState(state, s.taps), out


def lfsr_leap64(s: LfsrState) -> tuple[LfsrState, int]:
    """Advance 64 steps at once.

    The returned word packs the 64 emitted bits, bit 0 first. In sequence
    order the register is just the bit-reversed state, so the emitted word
    is that window and the next window follows from the recurrence applied
    word-wide; bits that read freshly produced feedback settle in a second
    pass.
    """
    if s.state == 0:
        raise ZeroStateError("the all-zero LFSR state is absorbing")
    w = _reverse64(s.state)
    offsets = [64 - p for p in s.taps]
    new = 0
    for _ in range(_leap_passes(s.taps)):
        ext = w | (new << 64)
        acc = 0
        for d in offsets:
            acc ^= ext >> d
        new = acc & MASK64
    return LfsrState(_reverse64(new), s.taps), w


# ---------------------------------------------------------------------------
# descriptors and streams

@dataclass(frozen=True)
class GeneratorDescriptor:
    """Replayable pattern-stream recipe, text form ``kind:seed[:params]``.

    ``params`` are the taps for ``mseq``, ``(multiplier, increment)`` for
    ``lcg`` and empty for ``mt``.
    """

    kind: str = "mseq"
    seed: int = DEFAULT_SEED
    params: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DescriptorError(f"unknown generator kind {self.kind!r}")
        if not 0 <= self.seed <= MASK64:
            raise DescriptorError("seed must be a 64-bit unsigned integer")
        params = tuple(int(p) for p in self.params)
        if self.kind == "mseq":
            if self.seed == 0:
                raise ZeroStateError("M-sequence seed must be nonzero")
            params = tuple(sorted(set(params or DEFAULT_TAPS), reverse=True))
            if not is_maximal_length(params):
                raise DescriptorError(f"taps {params} are not maximal-length")
        elif self.kind == "lcg":
            params = params or (LCG_MULTIPLIER, LCG_INCREMENT)
            if len(params) != 2 or not all(0 <= p <= MASK64 for p in params):
                raise DescriptorError("lcg params are multiplier,increment")
        elif params:
            raise DescriptorError("mt takes no params")
        object.__setattr__(self, "params", params)

    def __str__(self) -> str:
        text = f"{self.kind}:{self.seed}"
        if self.params:
            text += ":" + ",".join(str(p) for p in self.params)
        return text

    @classmethod
    def parse(cls, text: str) -> "GeneratorDescriptor":
        parts = text.strip().split(":")
        if not 2 <= len(parts) <= 3:
            raise DescriptorError(f"bad generator descriptor {text!r}")
        try:
            seed = int(parts[1], 0)
            params = tuple(int(p, 0) for p in parts[2].split(",")) if len(parts) == 3 else ()
        except ValueError:
            raise DescriptorError(f"bad generator descriptor {text!r}") from None
        return cls(parts[0], seed, params)

    def stream(self) -> "PatternStream":
        return PatternStream(self)


def _mt_state(seed: int) -> np.random.RandomState:
    # 32-bit seeds use the reference init_genrand; wider seeds init_by_array
    if seed <= 0xFFFFFFFF:
        return np.random.RandomState(seed)
    return np.random.RandomState(np.array([seed & 0xFFFFFFFF, seed >> 32], dtype=np.uint32))


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """(n, npix) 0/1 array -> (n, ceil(npix/64)) packed uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8)
    n, npix = bits.shape
    nwords = -(-npix // 64)
    padded = np.zeros((n, nwords * 64), dtype=np.uint8)
    padded[:, :npix] = bits
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64).reshape(n, nwords)


def unpack_bits(words: np.ndarray, npix: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`."""
    words = np.ascontiguousarray(words, dtype="<u8")
    n = words.shape[0]
    bits = np.unpackbits(words.view(np.uint8).reshape(n, -1), axis=1, bitorder="little")
    return bits[:, :npix]


class PatternStream:
    """Mutable, single-owner generator state for one descriptor."""

    def __init__(self, descriptor: GeneratorDescriptor):
        self.descriptor = descriptor
        if descriptor.kind == "mseq":
            self.lfsr = LfsrState(descriptor.seed, descriptor.params)
        elif descriptor.kind == "lcg":
            self.x = descriptor.seed
        else:
            self.rs = _mt_state(descriptor.seed)

    def next_words(self, n: int, width: int, height: int) -> np.ndarray:
        """The next ``n`` patterns as packed words, shape ``(n, ceil(w*h/64))``."""
        npix = width * height
        if npix <= 0:
            raise DimensionError("pattern dimensions must be positive")
        kind = self.descriptor.kind
        if kind == "mseq":
            if npix % 64:
                raise DimensionError(
                    f"M-sequence patterns need width*height divisible by 64, got {npix}"
                )
            taps = self.lfsr.taps
            w0 = np.uint64(_reverse64(self.lfsr.state))
            words, w = _kernels.lfsr_words(w0, _offsets(taps), _leap_passes(taps),
                                           n * (npix // 64))
            self.lfsr = LfsrState(_reverse64(int(w)), taps)
            return words.reshape(n, npix // 64)
        if kind == "lcg":
            a, c = self.descriptor.params
            words, x = _kernels.lcg_words(np.uint64(self.x), np.uint64(a), np.uint64(c),
                                          n, npix, -(-npix // 64))
            self.x = int(x)
            return words
        out = np.empty((n, -(-npix // 64)), dtype=np.uint64)
        chunk = max(1, (1 << 22) // npix)
        for i in range(0, n, chunk):
            m = min(chunk, n - i)
            raw = self.rs.randint(0, 1 << 32, size=(m, npix), dtype=np.uint32)
            out[i:i + m] = pack_bits((raw >> 31).astype(np.uint8))
        return out

    def next_pattern(self, width: int, height: int) -> Pattern:
        words = self.next_words(1, width, height)
        return Pattern(width, height, unpack_bits(words, width * height)[0])


def next_pattern(stream: PatternStream, width: int, height: int) -> Pattern:
    """Fill one pattern row-major; M-sequence leaps fill 64 pixels each."""
    return stream.next_pattern(width, height)


def pattern_words(descriptor: GeneratorDescriptor, n: int, width: int, height: int) -> np.ndarray:
    """Replay the first ``n`` patterns of ``descriptor`` as packed words."""
    return descriptor.stream().next_words(n, width, height)


def pattern_matrix(descriptor: GeneratorDescriptor, n: int, width: int, height: int) -> np.ndarray:
    """Replay the first ``n`` patterns as a ``(n, width*height)`` uint8 matrix."""
    return unpack_bits(pattern_words(descriptor, n, width, height), width * height)
