"""PSNR and SSIM between a ground truth and a normalized reconstruction."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import DimensionError, ObjectImage, ReconstructedImage

PSNR_IDENTICAL = math.inf


@dataclass(frozen=True)
class QualityReport:
    psnr: float
    ssim: float
    bits: int

    def __str__(self) -> str:
        return f"psnr={self.psnr:.2f} dB ssim={self.ssim:.4f} bits={self.bits}"


def _pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def psnr(a, b, peak: float = 255.0) -> float:
    """``10 log10(peak**2 / MSE)``; identical images give ``inf``."""
    a, b = _pair(a, b)
    mse = np.mean((a - b) ** 2)
    if mse == 0:
        return PSNR_IDENTICAL
    return float(10.0 * np.log10(peak * peak / mse))


def ssim(a, b, peak: float = 255.0, window: int = 8) -> float:
    """Mean SSIM over every ``window x window`` block (stride 1, uniform weights).

    Local statistics use population (1/N) moments; C1 = (0.01 peak)^2,
    C2 = (0.03 peak)^2.
    """
    a, b = _pair(a, b)
    if a.ndim != 2 or min(a.shape) < window:
        raise DimensionError(f"SSIM needs 2-D images of at least {window}x{window}")
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2

    def local_mean(x):
        return sliding_window_view(x, (window, window)).mean(axis=(-2, -1))

    mu_a, mu_b = local_mean(a), local_mean(b)
    var_a = local_mean(a * a) - mu_a * mu_a
    var_b = local_mean(b * b) - mu_b * mu_b
    cov = local_mean(a * b) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def quality_report(truth: ObjectImage, recon, bits: int = 8) -> QualityReport:
    """Score a reconstruction against the object on a ``bits``-deep scale.

    ``recon`` is either a :class:`ReconstructedImage` (normalized here) or
    an already normalized integer image.
    """
    from .reconstruct import normalize_for_display

    peak = float((1 << bits) - 1)
    if isinstance(recon, ReconstructedImage):
        recon = normalize_for_display(recon, bits)
    ref = np.rint(truth.data * peak)
    return QualityReport(psnr(ref, recon, peak), ssim(ref, recon, peak), bits)
