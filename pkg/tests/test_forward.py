import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ghostimg.core import DimensionError, ObjectImage, Pattern
from ghostimg.forward import (
    MeasurementSet,
    bucket_signal,
    build_reference_tables,
    pattern_intensity,
    quantize_adc,
    simulate_measurement,
    tables_from_words,
)
from ghostimg.patterns import GeneratorDescriptor, pack_bits, pattern_matrix

from oracles import correlations


def checkerboard(n=32):
    return (np.indices((n, n)).sum(0) % 2).astype(np.uint8)


def test_bucket_examples(rng):
    T = ObjectImage.from_array(rng.uniform(0, 1, (32, 32)))
    ones = Pattern(32, 32, np.ones(1024))
    zeros = Pattern(32, 32, np.zeros(1024))
    assert bucket_signal(T, ones) == pytest.approx(T.data.sum(), rel=1e-14)
    assert bucket_signal(T, zeros) == 0
    c = ObjectImage.from_array(np.full((32, 32), 0.25))
    I = Pattern(32, 32, checkerboard())
    assert bucket_signal(c, I) == 0.25 * pattern_intensity(I)
    with pytest.raises(DimensionError):
        bucket_signal(T, Pattern(16, 16, np.ones(256)))


def test_pattern_intensity_examples():
    assert pattern_intensity(Pattern(32, 32, np.ones(1024))) == 1024
    assert pattern_intensity(Pattern(32, 32, np.zeros(1024))) == 0
    assert pattern_intensity(Pattern(32, 32, checkerboard())) == 512


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 0.5), st.floats(0, 0.5), st.integers(0, 2**32 - 1))
def test_bucket_linearity(a, b, seed):
    r = np.random.default_rng(seed)
    t1, t2 = r.uniform(0, 1, (8, 8)), r.uniform(0, 1, (8, 8))
    I = Pattern(8, 8, r.integers(0, 2, 64))
    mix = bucket_signal(ObjectImage.from_array(a * t1 + b * t2), I)
    parts = (a * bucket_signal(ObjectImage.from_array(t1), I)
             + b * bucket_signal(ObjectImage.from_array(t2), I))
    assert mix == pytest.approx(parts, rel=1e-12, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 63))
def test_bucket_monotone(seed, pix):
    r = np.random.default_rng(seed)
    T = ObjectImage.from_array(r.uniform(0, 1, (8, 8)))
    bits = r.integers(0, 2, 64)
    before = bucket_signal(T, Pattern(8, 8, bits))
    bits[pix] = 1
    assert bucket_signal(T, Pattern(8, 8, bits)) >= before


def test_adc_quantizer():
    codes = quantize_adc([0.0, 0.125, 0.126, 512.0, 1023.9, 1024.0], 1024, 12)
    assert codes.tolist() == [0, 1, 1, 2048, 4095, 4095]


def test_simulate_all_ones_equals_intensity(mseq):
    T = ObjectImage.from_array(np.ones((32, 32)))
    m = simulate_measurement(T, mseq, 300)
    P = pattern_matrix(mseq, 300, 32, 32)
    assert np.array_equal(m.samples, P.sum(1).astype(float))


def test_simulate_matches_per_pattern_bucket(rng, mseq):
    T = ObjectImage.from_array(rng.uniform(0, 1, (32, 32)))
    m = simulate_measurement(T, mseq, 50)
    st_ = mseq.stream()
    direct = [bucket_signal(T, st_.next_pattern(32, 32)) for _ in range(50)]
    assert np.allclose(m.samples, direct, rtol=1e-13)


def test_simulate_errors_and_determinism(fixture_object, mseq):
    with pytest.raises(ValueError):
        simulate_measurement(fixture_object, mseq, 0)
    a = simulate_measurement(fixture_object, mseq, 16384, adc_bits=12)
    b = simulate_measurement(fixture_object, mseq, 16384, adc_bits=12)
    assert a == b and a.n == 16384
    assert a.samples.dtype == np.int64 and a.samples.max() < 4096


def test_noise_clips_and_is_seeded(fixture_object, mseq):
    a = simulate_measurement(fixture_object, mseq, 64, noise_sigma=2000.0, noise_seed=3)
    b = simulate_measurement(fixture_object, mseq, 64, noise_sigma=2000.0, noise_seed=3)
    assert a == b and a.samples.min() == 0.0


def test_measurement_validation(mseq):
    with pytest.raises(ValueError):
        MeasurementSet([], mseq, 32, 32)
    with pytest.raises(ValueError):
        MeasurementSet([-1.0], mseq, 32, 32)
    with pytest.raises(ValueError):
        MeasurementSet([4096], mseq, 32, 32, adc_bits=12)
    with pytest.raises(ValueError):
        MeasurementSet([1.5], mseq, 32, 32, adc_bits=12)


def test_tables_all_ones_generator():
    words = pack_bits(np.ones((10, 1024), dtype=np.uint8))
    ref = tables_from_words(words, 32, 32, GeneratorDescriptor())
    assert ref.mean_r == 1024 and np.all(ref.mean_ri == 1024)


def test_tables_match_direct_summation(mseq):
    n = 2000
    ref = build_reference_tables(mseq, n, 32, 32)
    _, _, mean_r, mean_ri = correlations(pattern_matrix(mseq, n, 32, 32), np.zeros(n))
    assert ref.mean_r == mean_r
    assert np.array_equal(ref.mean_ri.ravel(), mean_ri)
    assert np.all(ref.mean_ri <= ref.mean_r)


def test_tables_default_run(mseq):
    a = build_reference_tables(mseq, 16384, 32, 32)
    b = build_reference_tables(mseq, 16384, 32, 32)
    assert a == b and np.array_equal(a.sum_ri, b.sum_ri)
    assert abs(a.mean_r - 512) <= 0.02 * 512
    assert a.sum_r == int(pattern_matrix(mseq, 16384, 32, 32).sum())
