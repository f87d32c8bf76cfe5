import pytest

from ghostimg.bench import BenchReport, default_object, format_table, run_bench


def test_report_fields():
    r = BenchReport("dgi-fixed", 64, 1, 16384, 32, 32, 2.5, 20)
    assert r.throughput == 400.0
    assert "median_ms=2.5000" in r.line() and "fps=400.0" in r.line()
    assert "dgi-fixed" in format_table([r])


def test_default_object_is_binary_stencil():
    obj = default_object()
    assert set(obj.data.ravel().tolist()) == {0.0, 1.0}
    assert obj.data.mean() > 0.5


def test_run_bench_warns_and_reports():
    with pytest.warns(UserWarning, match="statistically weak"):
        reports = run_bench("dgi-float", lanes=[64], workers=[1, 2], n=256, repeat=3)
    assert [(r.lanes, r.workers) for r in reports] == [(64, 1), (64, 2)]
    assert all(r.runs == 3 and r.median_ms > 0 for r in reports)
