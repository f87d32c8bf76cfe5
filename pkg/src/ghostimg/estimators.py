"""scikit-learn front end.

``BucketSimulator`` turns flattened objects into bucket-sample vectors and
``GhostReconstructor`` turns bucket-sample vectors back into images, so
both drop into a :class:`sklearn.pipeline.Pipeline`::

    pipe = make_pipeline(BucketSimulator(n_patterns=4096),
                         GhostReconstructor(n_patterns=4096))
    images = pipe.fit_transform(objects)       # (m, 1024) -> (m, 1024)
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .core import ObjectImage
from .forward import MeasurementSet, build_reference_tables, simulate_measurement
from .patterns import GeneratorDescriptor
from .reconstruct import ENGINES, FixedSchedule, reconstruct


def _descriptor(generator) -> GeneratorDescriptor:
    if isinstance(generator, GeneratorDescriptor):
        return generator
    return GeneratorDescriptor.parse(generator)


class BucketSimulator(TransformerMixin, BaseEstimator):
    """Simulated single-pixel detector.

    Parameters
    ----------
    generator : str or GeneratorDescriptor
        Pattern stream, e.g. ``"mseq:1"``.
    n_patterns : int
    width, height : int
    adc_bits : int or None
        Quantize samples to ADC codes when set.
    noise_sigma : float
        Gaussian detector noise in bucket units.
    random_state : int
        Seed for the noise; object ``j`` of a batch uses ``random_state + j``.
    """

    def __init__(self, generator="mseq:1", n_patterns=16384, width=32, height=32,
                 adc_bits=None, noise_sigma=0.0, random_state=0):
        self.generator = generator
        self.n_patterns = n_patterns
        self.width = width
        self.height = height
        self.adc_bits = adc_bits
        self.noise_sigma = noise_sigma
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X)
        if X.shape[1] != self.width * self.height:
            raise ValueError(f"expected {self.width * self.height} features, got {X.shape[1]}")
        self.generator_ = _descriptor(self.generator)
        self.n_features_in_ = X.shape[1]
        return self

    def measure(self, X) -> list[MeasurementSet]:
        check_is_fitted(self, "generator_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return [
            simulate_measurement(ObjectImage(self.width, self.height, row), self.generator_,
                                 self.n_patterns, self.adc_bits, self.noise_sigma,
                                 self.random_state + j)
            for j, row in enumerate(X)
        ]

    def transform(self, X):
        return np.vstack([m.samples for m in self.measure(X)])


class GhostReconstructor(TransformerMixin, BaseEstimator):
    """Correlation reconstruction of bucket-sample vectors.

    ``fit`` replays the pattern stream once to build the object-independent
    reference tables; ``transform`` maps an ``(m, n_patterns)`` array of
    samples to ``(m, width*height)`` unnormalized images. The fixed engine
    expects integer ADC codes and returns ``<R>`` times the DGI image.
    """

    def __init__(self, engine="dgi-float", generator="mseq:1", n_patterns=16384,
                 width=32, height=32, adc_bits=None, lanes=64, workers=1):
        self.engine = engine
        self.generator = generator
        self.n_patterns = n_patterns
        self.width = width
        self.height = height
        self.adc_bits = adc_bits
        self.lanes = lanes
        self.workers = workers

    def fit(self, X=None, y=None):
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}")
        self.generator_ = _descriptor(self.generator)
        self.schedule_ = FixedSchedule(lanes=self.lanes)
        self.tables_ = build_reference_tables(self.generator_, self.n_patterns,
                                              self.width, self.height)
        self.n_features_in_ = self.n_patterns
        return self

    def transform(self, X):
        check_is_fitted(self, "tables_")
        X = check_array(X)
        if X.shape[1] != self.n_patterns:
            raise ValueError(f"expected {self.n_patterns} samples per row, got {X.shape[1]}")
        adc_bits = self.adc_bits
        if self.engine == "dgi-fixed" and adc_bits is None:
            adc_bits = 12
        out = np.empty((X.shape[0], self.width * self.height))
        for j, row in enumerate(X):
            m = MeasurementSet(row, self.generator_, self.width, self.height, adc_bits)
            out[j] = reconstruct(m, self.engine, self.tables_, self.schedule_,
                                 self.workers).data.ravel()
        return out
