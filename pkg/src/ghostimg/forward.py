"""Single-pixel measurement model and the object-independent reference tables."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .core import DimensionError, ObjectImage, Pattern, _frozen
from .patterns import GeneratorDescriptor, pattern_words

DEFAULT_ADC_BITS = 12


@dataclass(frozen=True)
class MeasurementSet:
    """Ordered bucket samples plus everything needed to replay their patterns.

    Samples are float64 for an ideal detector, int64 ADC codes when
    ``adc_bits`` is set.
    """

    samples: np.ndarray
    generator: GeneratorDescriptor
    width: int
    height: int
    adc_bits: Optional[int] = None

    def __post_init__(self):
        if self.adc_bits is None:
            s = np.asarray(self.samples, dtype=np.float64)
        else:
            if not 1 <= self.adc_bits <= 32:
                raise ValueError("adc_bits must be in 1..32")
            s = np.asarray(self.samples)
            if s.size and not np.array_equal(s, np.round(s)):
                raise ValueError("quantized samples must be integers")
            s = s.astype(np.int64)
            if s.size and s.max() >= 1 << self.adc_bits:
                raise ValueError(f"sample exceeds {self.adc_bits}-bit range")
        if s.ndim != 1 or s.size == 0:
            raise ValueError("a measurement needs at least one sample")
        if s.min() < 0 or not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite and non-negative")
        if self.width <= 0 or self.height <= 0:
            raise DimensionError("dimensions must be positive")
        object.__setattr__(self, "samples", _frozen(s))

    @property
    def n(self) -> int:
        return int(self.samples.size)

    @property
    def quantized(self) -> bool:
        return self.adc_bits is not None

    def __eq__(self, other):
        if not isinstance(other, MeasurementSet):
            return NotImplemented
        return (self.generator == other.generator and self.width == other.width
                and self.height == other.height and self.adc_bits == other.adc_bits
                and self.samples.dtype == other.samples.dtype
                and np.array_equal(self.samples, other.samples))


@dataclass(frozen=True)
class ReferenceTables:
    """<R> and the per-pixel <R*I> table for one pattern stream.

    ``sum_r``/``sum_ri`` keep the exact integer sums when the tables were
    built by replay; tables loaded from disk carry only the means.
    """

    mean_r: float
    mean_ri: np.ndarray
    n: int
    generator: GeneratorDescriptor
    sum_r: Optional[int] = field(default=None, compare=False)
    sum_ri: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        mean_ri = np.asarray(self.mean_ri, dtype=np.float64)
        if mean_ri.ndim != 2:
            raise DimensionError("mean_ri must be a 2-D table")
        if self.mean_r < 0 or mean_ri.min() < 0 or mean_ri.max() > self.mean_r:
            raise ValueError("reference tables violate 0 <= <R*I> <= <R>")
        object.__setattr__(self, "mean_ri", _frozen(mean_ri))
        object.__setattr__(self, "mean_r", float(self.mean_r))

    @property
    def width(self) -> int:
        return self.mean_ri.shape[1]

    @property
    def height(self) -> int:
        return self.mean_ri.shape[0]

    def __eq__(self, other):
        if not isinstance(other, ReferenceTables):
            return NotImplemented
        return (self.n == other.n and self.generator == other.generator
                and self.mean_r == other.mean_r
                and np.array_equal(self.mean_ri, other.mean_ri))


def _check_same_shape(a, b):
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")


def bucket_signal(obj: ObjectImage, pattern: Pattern) -> float:
    """Total transmitted intensity: sum of T over the lit pixels."""
    _check_same_shape(obj, pattern)
    return float(obj.data[pattern.bits.astype(bool)].sum())


def pattern_intensity(pattern: Pattern) -> int:
    """Number of lit pixels."""
    return int(pattern.bits.sum())


def quantize_adc(samples, full_scale: float, bits: int) -> np.ndarray:
    """Uniform mid-tread quantizer with LSB ``full_scale / 2**bits``.

    Codes round half up and saturate at ``2**bits - 1``.
    """
    codes = np.floor(np.asarray(samples, dtype=np.float64) * (2.0 ** bits / full_scale) + 0.5)
    return np.clip(codes, 0, (1 << bits) - 1).astype(np.int64)


def bucket_signals_from_words(obj: ObjectImage, words: np.ndarray) -> np.ndarray:
    """Bucket samples for every packed pattern, in stream order."""
    flat = np.ascontiguousarray(obj.data.ravel())
    return _kernels.bucket_sums(words, flat, obj.n_pixels)


def simulate_measurement(obj: ObjectImage, generator: GeneratorDescriptor, n: int,
                         adc_bits: Optional[int] = None, noise_sigma: float = 0.0,
                         noise_seed: int = 0) -> MeasurementSet:
    """Simulate ``n`` single-pixel measurements of ``obj``.

    ``noise_sigma`` adds Gaussian detector noise (in bucket units) before
    quantization; negative readings clip to zero.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    words = pattern_words(generator, n, obj.width, obj.height)
    s = bucket_signals_from_words(obj, words)
    if noise_sigma > 0:
        s = np.maximum(s + np.random.default_rng(noise_seed).normal(0.0, noise_sigma, n), 0.0)
    if adc_bits is not None:
        s = quantize_adc(s, obj.n_pixels, adc_bits)
    return MeasurementSet(s, generator, obj.width, obj.height, adc_bits)


def tables_from_words(words: np.ndarray, width: int, height: int,
                      generator: GeneratorDescriptor) -> ReferenceTables:
    n = words.shape[0]
    npix = width * height
    r = _kernels.popcounts(words)
    sum_ri = np.empty(npix, dtype=np.int64)
    _kernels.masked_sums(words, r, 0, npix, sum_ri)
    sum_r = int(r.sum())
    return ReferenceTables(
        mean_r=sum_r / n,
        mean_ri=(sum_ri / n).reshape(height, width),
        n=n,
        generator=generator,
        sum_r=sum_r,
        sum_ri=sum_ri.reshape(height, width),
    )


def build_reference_tables(generator: GeneratorDescriptor, n: int, width: int,
                           height: int) -> ReferenceTables:
    """Replay the stream and average R_i and R_i * I_i(x, y) over ``n`` patterns."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return tables_from_words(pattern_words(generator, n, width, height), width, height, generator)
