"""Reconstruction timing harness.

Only the reconstruction call is timed: pattern replay is inside it, file
I/O and table precomputation are not.
"""
from __future__ import annotations

import statistics
import time
import warnings
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .core import ObjectImage
from .forward import build_reference_tables, simulate_measurement
from .patterns import GeneratorDescriptor
from .reconstruct import FixedSchedule, reconstruct

MIN_RUNS = 20


@dataclass(frozen=True)
class BenchReport:
    engine: str
    lanes: int
    workers: int
    n: int
    width: int
    height: int
    median_ms: float
    runs: int

    @property
    def throughput(self) -> float:
        """Reconstructions per second, i.e. the implied frame rate in Hz."""
        return 1000.0 / self.median_ms if self.median_ms > 0 else float("inf")

    def line(self) -> str:
        return (f"BENCH engine={self.engine} lanes={self.lanes} workers={self.workers} "
                f"n={self.n} size={self.width}x{self.height} median_ms={self.median_ms:.4f} "
                f"fps={self.throughput:.1f} runs={self.runs}")


def default_object(width: int = 32, height: int = 32) -> ObjectImage:
    """Opaque cross on a transmissive field."""
    a = np.ones((height, width))
    a[height // 4:3 * height // 4, 3 * width // 8:5 * width // 8] = 0
    a[3 * height // 8:height // 2, width // 5:width - width // 5] = 0
    return ObjectImage.from_array(a)


def time_reconstruction(m, engine, ref, schedule, workers, repeat, warmup=2) -> list[float]:
    for _ in range(warmup):
        reconstruct(m, engine, ref, schedule, workers)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        reconstruct(m, engine, ref, schedule, workers)
        times.append((time.perf_counter() - t0) * 1000.0)
    return times


def run_bench(engine: str = "dgi-fixed", lanes: Iterable[int] = (64,),
              workers: Iterable[int] = (1,), n: int = 16384, repeat: int = MIN_RUNS,
              obj: Optional[ObjectImage] = None,
              generator: GeneratorDescriptor = GeneratorDescriptor()) -> list[BenchReport]:
    if repeat < MIN_RUNS:
        warnings.warn(f"{repeat} runs per configuration is statistically weak "
                      f"(use at least {MIN_RUNS})", stacklevel=2)
    obj = obj or default_object()
    adc = 12 if engine == "dgi-fixed" else None
    m = simulate_measurement(obj, generator, n, adc)
    ref = build_reference_tables(generator, n, obj.width, obj.height)
    reports = []
    for lane_count in lanes:
        schedule = FixedSchedule(lanes=lane_count)
        for w in workers:
            times = time_reconstruction(m, engine, ref, schedule, w, repeat)
            reports.append(BenchReport(engine, lane_count, w, n, obj.width, obj.height,
                                       statistics.median(times), len(times)))
    return reports


def format_table(reports: list[BenchReport]) -> str:
    head = f"{'engine':<10} {'lanes':>5} {'workers':>7} {'n':>6} {'median ms':>10} {'fps':>9}"
    rows = [head, "-" * len(head)]
    for r in reports:
        rows.append(f"{r.engine:<10} {r.lanes:>5} {r.workers:>7} {r.n:>6} "
                    f"{r.median_ms:>10.3f} {r.throughput:>9.1f}")
    return "\n".join(rows)
