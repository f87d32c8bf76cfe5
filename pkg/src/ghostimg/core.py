"""Shared value types and the exact fixed-point kernel.

Fixed-point numbers are an integer mantissa plus an explicit
:class:`FixedFormat` ``(signed, int_bits, frac_bits)``, so the format of
every datapath stage is a plain value that tests can assert on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

MAX_MANTISSA_BITS = 64

ROUNDING_MODES = ("nearest", "truncate")
OVERFLOW_MODES = ("strict", "saturate")


class GhostImagingError(Exception):
    """Base class for every error raised by this package."""

    kind = "error"


class DimensionError(GhostImagingError, ValueError):
    kind = "dimension"


class FixedOverflowError(GhostImagingError, OverflowError):
    kind = "overflow"


class FormatWidthError(GhostImagingError, ValueError):
    kind = "format-width"


class FormatMismatchError(GhostImagingError, ValueError):
    kind = "format-mismatch"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ObjectImage:
    """Object transmittance on a ``height x width`` grid, values in [0, 1]."""

    width: int
    height: int
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.size != self.width * self.height:
            raise DimensionError(
                f"object data has {data.size} values, expected {self.width}x{self.height}"
            )
        data = data.reshape(self.height, self.width)
        if not np.all(np.isfinite(data)) or data.min() < 0.0 or data.max() > 1.0:
            raise ValueError("transmittance values must lie in [0, 1]")
        object.__setattr__(self, "data", _frozen(data))

    @classmethod
    def from_array(cls, a) -> "ObjectImage":
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2:
            raise DimensionError("object array must be 2-D (height, width)")
        return cls(a.shape[1], a.shape[0], a)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    @property
    def n_pixels(self) -> int:
        return self.width * self.height


@dataclass(frozen=True)
class Pattern:
    """One binary illumination pattern (1 = mirror on)."""

    width: int
    height: int
    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.size != self.width * self.height:
            raise DimensionError(
                f"pattern has {bits.size} bits, expected {self.width}x{self.height}"
            )
        if bits.size and not np.isin(bits, (0, 1)).all():
            raise ValueError("pattern bits must be 0 or 1")
        object.__setattr__(
            self, "bits", _frozen(bits.astype(np.uint8).reshape(self.height, self.width))
        )

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)


@dataclass(frozen=True)
class FixedFormat:
    """``(signed, int_bits, frac_bits)``; the sign bit is not counted in the mantissa."""

    signed: bool
    int_bits: int
    frac_bits: int

    def __post_init__(self):
        if self.int_bits < 0 or self.frac_bits < 0:
            raise ValueError("int_bits and frac_bits must be non-negative")
        if self.total_bits > MAX_MANTISSA_BITS:
            raise FormatWidthError(
                f"format {self} needs {self.total_bits} bits (max {MAX_MANTISSA_BITS})"
            )

    @property
    def mantissa_bits(self) -> int:
        return self.int_bits + self.frac_bits

    @property
    def total_bits(self) -> int:
        return self.mantissa_bits + (1 if self.signed else 0)

    @property
    def max_raw(self) -> int:
        return (1 << self.mantissa_bits) - 1

    @property
    def min_raw(self) -> int:
        return -(1 << self.mantissa_bits) if self.signed else 0

    @property
    def ulp(self) -> float:
        return 2.0 ** -self.frac_bits

    def __str__(self) -> str:
        return f"{'s' if self.signed else 'u'},{self.int_bits},{self.frac_bits}"

    @classmethod
    def parse(cls, text: str) -> "FixedFormat":
        """Parse the ``u,12,14`` / ``s,23,28`` text form."""
        parts = text.strip().split(",")
        if len(parts) != 3 or parts[0] not in ("u", "s"):
            raise ValueError(f"bad fixed-point format {text!r}")
        return cls(parts[0] == "s", int(parts[1]), int(parts[2]))


def _check_width(signed: bool, int_bits: int, frac_bits: int) -> FixedFormat:
    total = int_bits + frac_bits + (1 if signed else 0)
    if total > MAX_MANTISSA_BITS:
        raise FormatWidthError(
            f"widened format ({int(signed)},{int_bits},{frac_bits}) needs {total} bits"
        )
    return FixedFormat(signed, int_bits, frac_bits)


def _clamp_raw(raw: int, fmt: FixedFormat, overflow: str) -> int:
    if fmt.min_raw <= raw <= fmt.max_raw:
        return raw
    if overflow == "saturate":
        return min(max(raw, fmt.min_raw), fmt.max_raw)
    raise FixedOverflowError(f"raw value {raw} out of range for format {fmt}")


@dataclass(frozen=True)
class FixedValue:
    raw: int
    format: FixedFormat

    def __post_init__(self):
        raw = int(self.raw)
        if not self.format.min_raw <= raw <= self.format.max_raw:
            raise FixedOverflowError(f"raw value {raw} out of range for format {self.format}")
        object.__setattr__(self, "raw", raw)

    @property
    def value(self) -> Fraction:
        """Exact represented value."""
        return Fraction(self.raw, 1 << self.format.frac_bits)

    def __float__(self) -> float:
        return math.ldexp(self.raw, -self.format.frac_bits)


def _scale_round(x: Fraction, rounding: str) -> int:
    if rounding == "nearest":
        return round(x)  # Fraction.__round__ rounds half to even
    if rounding == "truncate":
        return math.floor(x)
    raise ValueError(f"unknown rounding mode {rounding!r}")


def fixed_from_real(v, fmt: FixedFormat, rounding: str = "nearest",
                    overflow: str = "strict") -> FixedValue:
    """Quantize a real number into ``fmt``.

    ``truncate`` drops the fraction bits below the LSB (floor, as an
    arithmetic right shift does). ``strict`` raises on overflow,
    ``saturate`` clamps to the format bounds.
    """
    if overflow not in OVERFLOW_MODES:
        raise ValueError(f"unknown overflow mode {overflow!r}")
    if isinstance(v, float) and not math.isfinite(v):
        raise FixedOverflowError(f"{v} is not representable")
    raw = _scale_round(Fraction(v) * (1 << fmt.frac_bits), rounding)
    return FixedValue(_clamp_raw(raw, fmt, overflow), fmt)


def fixed_mul(a: FixedValue, b: FixedValue) -> FixedValue:
    """Widening multiply: integer and fraction bits add, no rounding.

    Signed x signed gets one extra integer bit so that (-2**k) * (-2**j)
    stays representable.
    """
    fa, fb = a.format, b.format
    extra = 1 if fa.signed and fb.signed else 0
    fmt = _check_width(fa.signed or fb.signed, fa.int_bits + fb.int_bits + extra,
                       fa.frac_bits + fb.frac_bits)
    return FixedValue(_clamp_raw(a.raw * b.raw, fmt, "strict"), fmt)


def fixed_sub(a: FixedValue, b: FixedValue) -> FixedValue:
    """Exact ``a - b``; the result gains one integer bit and a sign."""
    if a.format != b.format:
        raise FormatMismatchError(f"cannot subtract {b.format} from {a.format}")
    f = a.format
    fmt = _check_width(True, f.int_bits + 1, f.frac_bits)
    return FixedValue(a.raw - b.raw, fmt)


def fixed_cast(x: FixedValue, fmt: FixedFormat, rounding: str = "truncate",
               overflow: str = "strict") -> FixedValue:
    """Re-align ``x`` into ``fmt`` (shift the binary point, then range-check)."""
    shift = fmt.frac_bits - x.format.frac_bits
    if shift >= 0:
        raw = x.raw << shift
    else:
        raw = _scale_round(Fraction(x.raw, 1 << -shift), rounding)
    return FixedValue(_clamp_raw(raw, fmt, overflow), fmt)


# ---------------------------------------------------------------------------
# array forms used by the reconstruction datapath (int64 mantissas)

def check_raw_range(raw: np.ndarray, fmt: FixedFormat, what: str = "value") -> np.ndarray:
    """Raise :class:`FixedOverflowError` unless every mantissa fits ``fmt``."""
    if fmt.total_bits > 63:
        raise FormatWidthError(f"array mantissas are int64; {fmt} is too wide")
    raw = np.asarray(raw)
    if raw.size and (raw.min() < fmt.min_raw or raw.max() > fmt.max_raw):
        raise FixedOverflowError(f"{what} overflows format {fmt}")
    return raw


def shift_raw(raw: np.ndarray, shift: int) -> np.ndarray:
    """Multiply mantissas by ``2**shift``; negative shifts truncate (floor)."""
    raw = np.asarray(raw, dtype=np.int64)
    return raw << shift if shift >= 0 else raw >> -shift


def quantize_array(values, fmt: FixedFormat, rounding: str = "truncate",
                   overflow: str = "strict") -> np.ndarray:
    """Vectorised :func:`fixed_from_real` returning int64 mantissas."""
    scaled = np.ldexp(np.asarray(values, dtype=np.float64), fmt.frac_bits)
    if rounding == "truncate":
        raw = np.floor(scaled)
    elif rounding == "nearest":
        raw = np.rint(scaled)  # half to even
    else:
        raise ValueError(f"unknown rounding mode {rounding!r}")
    if overflow == "saturate":
        raw = np.clip(raw, fmt.min_raw, fmt.max_raw)
    elif overflow != "strict":
        raise ValueError(f"unknown overflow mode {overflow!r}")
    check_raw_range(raw, fmt)
    return raw.astype(np.int64)


PROVENANCES = ("float-GI", "float-DGI", "fixed-DGI")


@dataclass(frozen=True)
class ReconstructedImage:
    """Reconstruction on an arbitrary scale.

    The fixed engine also fills ``raw`` (int64 mantissas) and ``fmt``;
    ``data`` is then ``raw / 2**fmt.frac_bits``.
    """

    width: int
    height: int
    data: np.ndarray
    provenance: str
    raw: Optional[np.ndarray] = field(default=None, compare=False)
    fmt: Optional[FixedFormat] = None

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        data = np.asarray(self.data, dtype=np.float64)
        if data.size != self.width * self.height:
            raise DimensionError("reconstruction size does not match its dimensions")
        object.__setattr__(self, "data", _frozen(data.reshape(self.height, self.width)))
        if self.raw is not None:
            raw = np.asarray(self.raw, dtype=np.int64).reshape(self.height, self.width)
            object.__setattr__(self, "raw", _frozen(raw))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)
