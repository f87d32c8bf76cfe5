"""Computational ghost imaging with a floating-point and a bit-accurate fixed-point engine."""
from .core import (
    DimensionError,
    FixedFormat,
    FixedOverflowError,
    FixedValue,
    GhostImagingError,
    ObjectImage,
    Pattern,
    ReconstructedImage,
    fixed_from_real,
    fixed_mul,
    fixed_sub,
)
from .estimators import BucketSimulator, GhostReconstructor
from .forward import (
    MeasurementSet,
    ReferenceTables,
    bucket_signal,
    build_reference_tables,
    pattern_intensity,
    simulate_measurement,
)
from .metrics import QualityReport, psnr, quality_report, ssim
from .patterns import GeneratorDescriptor, LfsrState, lfsr_leap64, lfsr_step, next_pattern
from .reconstruct import (
    FixedSchedule,
    normalize_for_display,
    reconstruct,
    reconstruct_dgi_fixed,
    reconstruct_dgi_float,
    reconstruct_gi,
)

__version__ = "0.1.0"
