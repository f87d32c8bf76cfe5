"""PGM images plus the text formats for measurements and reference tables.

Measurement file::

    GIMEAS1
    <n>
    <width>
    <height>
    <adc_bits | none>
    <generator descriptor>
    <n sample lines>

Table file (means stored as fixed-point mantissas)::

    GITAB1
    <n>
    <width>
    <height>
    <generator descriptor>
    <format of <R>>      e.g. u,11,14
    <format of <R*I>>
    <<R> mantissa>
    <width*height <R*I> mantissas, row-major>
"""
from __future__ import annotations

import os
import re
from typing import Optional, Union

import numpy as np

from .core import FixedFormat, GhostImagingError, ObjectImage, check_raw_range, quantize_array
from .forward import MeasurementSet, ReferenceTables
from .patterns import DescriptorError, GeneratorDescriptor

PathLike = Union[str, os.PathLike]

MEAS_MAGIC = "GIMEAS1"
TABLE_MAGIC = "GITAB1"
DEFAULT_TABLE_FORMAT = FixedFormat.parse("u,11,14")


class FileFormatError(GhostImagingError, ValueError):
    kind = "file-format"


class VersionMismatchError(FileFormatError):
    kind = "version-mismatch"


class CountMismatchError(FileFormatError):
    kind = "count-mismatch"


class PgmError(FileFormatError):
    kind = "pgm"


# ---------------------------------------------------------------------------
# PGM

_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _pgm_tokens(buf: bytes, count: int, pos: int = 0):
    out = []
    for _ in range(count):
        m = _TOKEN.match(buf, pos)
        if m is None:
            raise PgmError("malformed header: unexpected end of file")
        out.append(m.group(1))
        pos = m.end()
    return out, pos


def read_pgm_raw(path: PathLike) -> tuple[np.ndarray, int]:
    """Read a P2/P5 file into ``(integer array (h, w), maxval)``."""
    with open(path, "rb") as f:
        buf = f.read()
    magic = buf[:2]
    if magic not in (b"P2", b"P5"):
        raise PgmError(f"unsupported magic {magic!r}")
    try:
        (w, h, maxval), pos = _pgm_tokens(buf, 3, 2)
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise PgmError("malformed header") from None
    if w <= 0 or h <= 0 or not 0 < maxval <= 65535:
        raise PgmError(f"malformed header: {w}x{h} maxval {maxval}")
    if magic == b"P2":
        toks = buf[pos:].split()
        if len(toks) < w * h:
            raise PgmError(f"truncated body: {len(toks)} of {w * h} samples")
        try:
            data = np.array([int(t) for t in toks[:w * h]], dtype=np.int64)
        except ValueError:
            raise PgmError("non-numeric sample") from None
    else:
        if pos >= len(buf) or not buf[pos:pos + 1].isspace():
            raise PgmError("malformed header: missing separator before raster")
        pos += 1
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        need = w * h * dtype.itemsize
        if len(buf) - pos < need:
            raise PgmError(f"truncated body: {len(buf) - pos} of {need} bytes")
        data = np.frombuffer(buf, dtype=dtype, count=w * h, offset=pos).astype(np.int64)
    if data.max(initial=0) > maxval or data.min(initial=0) < 0:
        raise PgmError("sample exceeds maxval")
    return data.reshape(h, w), maxval


def read_pgm(path: PathLike) -> ObjectImage:
    """Read a PGM as transmittance, scaling each sample by ``1 / maxval``."""
    data, maxval = read_pgm_raw(path)
    return ObjectImage.from_array(data / maxval)


def write_pgm(image, path: PathLike, maxval: int = 255) -> None:
    """Write a binary P5 file.

    ``image`` is an :class:`ObjectImage` (scaled by ``maxval`` and rounded)
    or an integer array already in ``[0, maxval]``.
    """
    if isinstance(image, ObjectImage):
        data = np.floor(image.data * maxval + 0.5).astype(np.int64)
    else:
        data = np.asarray(image)
        if data.ndim != 2 or not np.issubdtype(data.dtype, np.integer):
            raise PgmError("write_pgm needs a 2-D integer array or an ObjectImage")
    if not 0 < maxval <= 65535 or data.min(initial=0) < 0 or data.max(initial=0) > maxval:
        raise PgmError(f"samples do not fit maxval {maxval}")
    h, w = data.shape
    dtype = ">u2" if maxval > 255 else np.uint8
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n%d\n" % (w, h, maxval))
        f.write(data.astype(dtype).tobytes())


# ---------------------------------------------------------------------------
# text helpers

def _lines(text: str, magic: str) -> list[str]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != magic:
        found = lines[0].strip() if lines else ""
        raise VersionMismatchError(f"expected {magic}, found {found!r}")
    return [ln.strip() for ln in lines]


def _int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise FileFormatError(f"bad {what}: {text!r}") from None


def _descriptor(text: str) -> GeneratorDescriptor:
    try:
        return GeneratorDescriptor.parse(text)
    except DescriptorError as e:
        raise FileFormatError(str(e)) from None


def _body(lines: list[str], start: int, count: int, what: str) -> list[str]:
    body = lines[start:]
    while body and not body[-1]:
        body.pop()
    if len(body) != count:
        raise CountMismatchError(f"header declares {count} {what}, body has {len(body)}")
    return body


# ---------------------------------------------------------------------------
# measurements

def format_measurement(m: MeasurementSet) -> str:
    if m.quantized:
        samples = [str(int(v)) for v in m.samples]
    else:
        samples = [repr(float(v)) for v in m.samples]
    header = [MEAS_MAGIC, str(m.n), str(m.width), str(m.height),
              "none" if m.adc_bits is None else str(m.adc_bits), str(m.generator)]
    return "\n".join(header + samples) + "\n"


def parse_measurement(text: str) -> MeasurementSet:
    lines = _lines(text, MEAS_MAGIC)
    if len(lines) < 6:
        raise FileFormatError("measurement header is incomplete")
    n = _int(lines[1], "sample count")
    width, height = _int(lines[2], "width"), _int(lines[3], "height")
    adc_bits: Optional[int] = None if lines[4] == "none" else _int(lines[4], "adc_bits")
    generator = _descriptor(lines[5])
    body = _body(lines, 6, n, "samples")
    try:
        if adc_bits is None:
            samples = np.array([float(v) for v in body], dtype=np.float64)
        else:
            samples = np.array([int(v) for v in body], dtype=np.int64)
    except ValueError as e:
        raise FileFormatError(f"bad sample: {e}") from None
    try:
        return MeasurementSet(samples, generator, width, height, adc_bits)
    except ValueError as e:
        raise FileFormatError(str(e)) from None


def write_measurement(m: MeasurementSet, path: PathLike) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(format_measurement(m))


def read_measurement(path: PathLike) -> MeasurementSet:
    with open(path, encoding="ascii") as f:
        return parse_measurement(f.read())


# ---------------------------------------------------------------------------
# reference tables

def _table_mantissas(exact, mean, n: int, fmt: FixedFormat) -> np.ndarray:
    k = n.bit_length() - 1
    if exact is not None and 1 << k == n:
        raw = np.asarray(exact, dtype=np.int64)
        raw = raw << (fmt.frac_bits - k) if fmt.frac_bits >= k else raw >> (k - fmt.frac_bits)
        return check_raw_range(raw, fmt, "table entry")
    return quantize_array(mean, fmt, "truncate", "strict")


def format_tables(ref: ReferenceTables, fmt_mean_r: FixedFormat = DEFAULT_TABLE_FORMAT,
                  fmt_mean_ri: FixedFormat = DEFAULT_TABLE_FORMAT) -> str:
    """Serialize tables as truncated fixed-point mantissas."""
    mean_r = int(_table_mantissas(ref.sum_r, ref.mean_r, ref.n, fmt_mean_r))
    mean_ri = _table_mantissas(ref.sum_ri, ref.mean_ri, ref.n, fmt_mean_ri).ravel()
    header = [TABLE_MAGIC, str(ref.n), str(ref.width), str(ref.height), str(ref.generator),
              str(fmt_mean_r), str(fmt_mean_ri), str(mean_r)]
    return "\n".join(header + [str(int(v)) for v in mean_ri]) + "\n"


def parse_tables(text: str) -> ReferenceTables:
    lines = _lines(text, TABLE_MAGIC)
    if len(lines) < 8:
        raise FileFormatError("table header is incomplete")
    n = _int(lines[1], "pattern count")
    width, height = _int(lines[2], "width"), _int(lines[3], "height")
    generator = _descriptor(lines[4])
    try:
        fmt_r, fmt_ri = FixedFormat.parse(lines[5]), FixedFormat.parse(lines[6])
    except ValueError as e:
        raise FileFormatError(str(e)) from None
    mean_r = _int(lines[7], "<R> mantissa")
    body = _body(lines, 8, width * height, "table entries")
    raw = np.array([_int(v, "table entry") for v in body], dtype=np.int64)
    check_raw_range(np.array([mean_r]), fmt_r, "<R>")
    check_raw_range(raw, fmt_ri, "table entry")
    try:
        return ReferenceTables(
            mean_r=float(np.ldexp(float(mean_r), -fmt_r.frac_bits)),
            mean_ri=np.ldexp(raw.astype(np.float64), -fmt_ri.frac_bits).reshape(height, width),
            n=n,
            generator=generator,
        )
    except ValueError as e:
        raise FileFormatError(str(e)) from None


def write_tables(ref: ReferenceTables, path: PathLike, **formats) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(format_tables(ref, **formats))


def read_tables(path: PathLike) -> ReferenceTables:
    with open(path, encoding="ascii") as f:
        return parse_tables(f.read())
