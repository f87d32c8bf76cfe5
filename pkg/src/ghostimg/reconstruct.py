"""Reconstruction engines: plain GI, floating-point DGI and fixed-point DGI.

The fixed engine evaluates the division-free product difference

    <R> * <S*I(x,y)>  -  <S> * <R*I(x,y)>

on integer mantissas, one group of ``lanes`` pixels at a time in row
order, so it reproduces a parallel-lane hardware datapath bit for bit.
"""
from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .core import (
    DimensionError,
    FixedFormat,
    FixedOverflowError,
    FormatWidthError,
    GhostImagingError,
    ReconstructedImage,
    check_raw_range,
    quantize_array,
    shift_raw,
)
from .forward import MeasurementSet, ReferenceTables
from .patterns import pattern_words

ENGINES = ("gi", "dgi-float", "dgi-fixed")


class ReconstructionError(GhostImagingError, ValueError):
    kind = "reconstruction"


class ZeroIntensityError(ReconstructionError):
    kind = "zero-intensity"


def _fmt(text):
    return FixedFormat.parse(text)


@dataclass(frozen=True)
class FixedSchedule:
    """Lane count and per-stage number formats of the fixed datapath.

    Defaults assume 12-bit ADC codes and n <= 2**14: a 2**14-sample sum of
    12-bit codes needs 26 bits, so the means keep 14 fraction bits and the
    divide by n is an exact shift.
    """

    lanes: int = 64
    fmt_s: FixedFormat = _fmt("u,12,0")
    fmt_mean_s: FixedFormat = _fmt("u,12,14")
    fmt_mean_si: FixedFormat = _fmt("u,12,14")
    fmt_mean_r: FixedFormat = _fmt("u,11,14")
    fmt_mean_ri: FixedFormat = _fmt("u,11,14")
    fmt_out: FixedFormat = _fmt("s,23,28")

    def __post_init__(self):
        if self.lanes < 1:
            raise ValueError("lanes must be positive")
        for f in (self.fmt_s, self.fmt_mean_s, self.fmt_mean_si, self.fmt_mean_r,
                  self.fmt_mean_ri):
            if f.signed:
                raise ValueError("input and mean formats are unsigned")
        if self.product_format().total_bits > 63:
            raise FormatWidthError("product format exceeds int64 mantissas")

    def check_dimensions(self, width: int, height: int) -> None:
        npix = width * height
        if npix % self.lanes:
            raise DimensionError(f"{self.lanes} lanes do not divide {npix} pixels")
        if self.lanes % width and width % self.lanes:
            raise DimensionError(
                f"{self.lanes} lanes neither fill whole rows nor tile a {width}-pixel row"
            )

    def product_format(self) -> FixedFormat:
        """Common format of both products after binary-point alignment."""
        a = (self.fmt_mean_r.int_bits + self.fmt_mean_si.int_bits,
             self.fmt_mean_r.frac_bits + self.fmt_mean_si.frac_bits)
        b = (self.fmt_mean_s.int_bits + self.fmt_mean_ri.int_bits,
             self.fmt_mean_s.frac_bits + self.fmt_mean_ri.frac_bits)
        return FixedFormat(False, max(a[0], b[0]), max(a[1], b[1]))


DEFAULT_SCHEDULE = FixedSchedule()


def _check_tables(m: MeasurementSet, ref: ReferenceTables) -> None:
    if ref.n != m.n or ref.generator != m.generator:
        raise ReconstructionError(
            f"tables were built for {ref.n} patterns of {ref.generator}, "
            f"measurement has {m.n} of {m.generator}"
        )
    if (ref.width, ref.height) != (m.width, m.height):
        raise DimensionError("table and measurement dimensions differ")


_POOLS: dict[int, ThreadPoolExecutor] = {}
_POOL_LOCK = threading.Lock()


def _pool(workers: int) -> ThreadPoolExecutor:
    with _POOL_LOCK:
        pool = _POOLS.get(workers)
        if pool is None:
            pool = _POOLS[workers] = ThreadPoolExecutor(max_workers=workers,
                                                        thread_name_prefix="ghostimg")
        return pool


def _run_blocks(fn, nblocks: int, workers: int) -> None:
    """Run ``fn(0..nblocks-1)``; blocks write disjoint output slices."""
    if workers <= 1 or nblocks == 1:
        for b in range(nblocks):
            fn(b)
        return
    list(_pool(workers).map(fn, range(nblocks)))


def _correlate(words, weights, npix, block, workers, dtype) -> np.ndarray:
    """Per-pixel sum of ``weights`` over the patterns that light the pixel."""
    out = np.empty(npix, dtype=dtype)
    weights = np.ascontiguousarray(weights, dtype=dtype)

    def run(b):
        _kernels.masked_sums(words, weights, b * block, min((b + 1) * block, npix), out)

    _run_blocks(run, -(-npix // block), workers)
    return out


def _float_block(npix, workers):
    return 64 if workers <= 1 else max(1, -(-npix // (4 * workers)))


def reconstruct_gi(m: MeasurementSet, workers: int = 1) -> ReconstructedImage:
    """Traditional correlation <S*I> - <S><I>."""
    npix = m.width * m.height
    words = pattern_words(m.generator, m.n, m.width, m.height)
    s = m.samples.astype(np.float64)
    block = _float_block(npix, workers)
    mean_si = _correlate(words, s, npix, block, workers, np.float64) / m.n
    mean_i = _correlate(words, np.ones(m.n), npix, block, workers, np.float64) / m.n
    o = mean_si - s.sum() / m.n * mean_i
    return ReconstructedImage(m.width, m.height, o, "float-GI")


def reconstruct_dgi_float(m: MeasurementSet, ref: ReferenceTables,
                          workers: int = 1) -> ReconstructedImage:
    """Differential GI: <S*I> - (<S>/<R>) <R*I>.

    Pixels whose difference is below the rounding-error bound of the two
    terms are flushed to zero, so an object with constant transmittance
    cancels exactly instead of leaving float noise that min-max display
    scaling would blow up to full range.
    """
    _check_tables(m, ref)
    if ref.mean_r == 0:
        raise ZeroIntensityError("<R> is zero; every pattern was dark")
    npix = m.width * m.height
    words = pattern_words(m.generator, m.n, m.width, m.height)
    s = m.samples.astype(np.float64)
    mean_si = _correlate(words, s, npix, _float_block(npix, workers), workers, np.float64) / m.n
    ratio = (s.sum() / m.n) / ref.mean_r
    b = ratio * ref.mean_ri.ravel()
    o = mean_si - b
    bound = (m.n + npix) * np.finfo(np.float64).eps * (np.abs(mean_si) + np.abs(b))
    o[np.abs(o) <= bound] = 0.0
    return ReconstructedImage(m.width, m.height, o, "float-DGI")


def _log2_exact(n: int) -> int:
    k = n.bit_length() - 1
    if n < 1 or 1 << k != n:
        raise ReconstructionError(f"fixed engine needs a power-of-two pattern count, got {n}")
    return k


def _table_raw(exact_sum, mean, k: int, fmt: FixedFormat, what: str) -> np.ndarray:
    if exact_sum is not None:
        raw = shift_raw(np.asarray(exact_sum, dtype=np.int64), fmt.frac_bits - k)
        return check_raw_range(raw, fmt, what)
    return quantize_array(mean, fmt, "truncate", "strict")


def reconstruct_dgi_fixed(m: MeasurementSet, ref: ReferenceTables,
                          schedule: FixedSchedule = DEFAULT_SCHEDULE,
                          workers: int = 1) -> ReconstructedImage:
    """Bit-accurate fixed-point DGI; returns <R><O>, the <R> factor left in.

    Requires ADC-quantized samples and a power-of-two ``n`` so every mean
    is an exact shift of a full-width accumulator. Any stage leaving its
    format raises :class:`FixedOverflowError`.
    """
    _check_tables(m, ref)
    if not m.quantized:
        raise ReconstructionError("fixed engine needs ADC-quantized samples")
    k = _log2_exact(m.n)
    sch = schedule
    sch.check_dimensions(m.width, m.height)
    npix = m.width * m.height

    s_raw = check_raw_range(m.samples << sch.fmt_s.frac_bits, sch.fmt_s, "sample")
    # accumulate at full width, shift once
    if s_raw.size and int(s_raw.max()) * m.n >= 1 << 62:
        raise FixedOverflowError("sample accumulator exceeds 62 bits")
    sum_s = int(s_raw.sum())
    mean_s = int(check_raw_range(
        shift_raw(np.array([sum_s]), sch.fmt_mean_s.frac_bits - sch.fmt_s.frac_bits - k),
        sch.fmt_mean_s, "<S>")[0])

    mean_r = int(_table_raw(ref.sum_r, ref.mean_r, k, sch.fmt_mean_r, "<R>"))
    mean_ri = _table_raw(ref.sum_ri, ref.mean_ri, k, sch.fmt_mean_ri, "<R*I>").ravel()

    prod_fmt = sch.product_format()
    shift_a = prod_fmt.frac_bits - (sch.fmt_mean_r.frac_bits + sch.fmt_mean_si.frac_bits)
    shift_b = prod_fmt.frac_bits - (sch.fmt_mean_s.frac_bits + sch.fmt_mean_ri.frac_bits)
    diff_fmt = FixedFormat(True, prod_fmt.int_bits + 1, prod_fmt.frac_bits)
    out_shift = sch.fmt_out.frac_bits - diff_fmt.frac_bits
    si_shift = sch.fmt_mean_si.frac_bits - sch.fmt_s.frac_bits - k

    words = pattern_words(m.generator, m.n, m.width, m.height)
    acc = np.empty(npix, dtype=np.int64)
    out = np.empty(npix, dtype=np.int64)
    lanes = sch.lanes

    def lane_group(g):
        lo, hi = g * lanes, (g + 1) * lanes
        # conditional accumulate of S_i into each lane
        _kernels.masked_sums(words, s_raw, lo, hi, acc)
        mean_si = check_raw_range(shift_raw(acc[lo:hi], si_shift), sch.fmt_mean_si, "<S*I>")
        # two widening multiplies and one subtraction per lane
        a = shift_raw(mean_si * mean_r, shift_a)
        b = shift_raw(mean_ri[lo:hi] * mean_s, shift_b)
        check_raw_range(a, prod_fmt, "<R><S*I>")
        check_raw_range(b, prod_fmt, "<S><R*I>")
        out[lo:hi] = check_raw_range(shift_raw(a - b, out_shift), sch.fmt_out, "output")

    _run_blocks(lane_group, npix // lanes, workers)
    return ReconstructedImage(m.width, m.height, np.ldexp(out.astype(np.float64),
                                                          -sch.fmt_out.frac_bits),
                              "fixed-DGI", raw=out, fmt=sch.fmt_out)


def reconstruct(m: MeasurementSet, engine: str = "dgi-float",
                ref: Optional[ReferenceTables] = None,
                schedule: FixedSchedule = DEFAULT_SCHEDULE,
                workers: int = 1) -> ReconstructedImage:
    """Dispatch on ``engine``; DGI tables are replayed when not supplied."""
    if engine == "gi":
        return reconstruct_gi(m, workers)
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    if ref is None:
        from .forward import build_reference_tables
        ref = build_reference_tables(m.generator, m.n, m.width, m.height)
    if engine == "dgi-float":
        return reconstruct_dgi_float(m, ref, workers)
    return reconstruct_dgi_fixed(m, ref, schedule, workers)


def normalize_for_display(o: ReconstructedImage, bits: int = 8) -> np.ndarray:
    """Affine min-max map onto ``[0, 2**bits - 1]``, rounding half up.

    Constant images map to all zeros. Fixed-engine images are mapped from
    their integer mantissas with exact rational rounding.
    """
    if not 1 <= bits <= 16:
        raise ValueError("bits must be in 1..16")
    dtype = np.uint8 if bits <= 8 else np.uint16
    top = (1 << bits) - 1
    if o.raw is not None:
        raw = o.raw.astype(object)
        lo, hi = raw.min(), raw.max()
        if lo == hi:
            return np.zeros(o.shape, dtype=dtype)
        num = (raw - lo) * (2 * top) + (hi - lo)
        return (num // (2 * (hi - lo))).astype(dtype)
    d = o.data
    lo, hi = d.min(), d.max()
    if lo == hi:
        return np.zeros(o.shape, dtype=dtype)
    return np.floor((d - lo) / (hi - lo) * top + 0.5).astype(dtype)
