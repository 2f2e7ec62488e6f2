import numpy as np
import pytest
from hypothesis import given, strategies as st

from evoniche.benchmarks import (
    benchmark_names,
    builtin_suite,
    equal_maxima,
    get_benchmark,
    grid_peak_oracle,
    himmelblau,
    sphere,
    uneven_decreasing_maxima,
)
from evoniche.exceptions import InvalidInputError


def test_equal_maxima_oracle():
    peaks = grid_peak_oracle(equal_maxima())
    assert len(peaks) == 5
    for (x, v), target in zip(peaks, [0.1, 0.3, 0.5, 0.7, 0.9]):
        assert x[0] == pytest.approx(target, abs=1e-6)
        assert v == pytest.approx(1.0, abs=1e-6)


def test_sphere_oracle():
    peaks = grid_peak_oracle(sphere(2))
    assert len(peaks) == 1
    np.testing.assert_allclose(peaks[0][0], [0.0, 0.0], atol=1e-6)


def test_himmelblau_four_equal_peaks():
    peaks = grid_peak_oracle(himmelblau())
    assert len(peaks) == 4
    values = [v for _, v in peaks]
    assert max(values) - min(values) < 1e-6


@pytest.mark.parametrize("bench", [b for b in builtin_suite() if b.known_peaks is not None],
                         ids=lambda b: b.name)
def test_shipped_peaks_reproduce(bench):
    found = grid_peak_oracle(bench)
    for loc, value in bench.known_peaks:
        d = [np.linalg.norm(np.asarray(x) - loc) for x, _ in found]
        k = int(np.argmin(d))
        assert d[k] <= 1e-4
        assert abs(found[k][1] - value) <= 1e-6


def test_uneven_peaks_from_oracle():
    bench = uneven_decreasing_maxima()
    peaks = bench.peaks
    assert len(peaks) == 5
    values = [v for _, v in peaks]
    assert values == sorted(values, reverse=True)
    assert values[0] == pytest.approx(1.0, abs=1e-3)


@given(st.sampled_from(benchmark_names()), st.integers(0, 2**32 - 1))
def test_evaluators_are_pure(name, seed):
    bench = get_benchmark(name)
    x = bench.sample(np.random.default_rng(seed))
    assert bench(x) == bench(x)
    assert bench.evaluate_many(np.stack([x.values] * 3)).tolist() == [bench(x)] * 3


def test_oracle_limits():
    with pytest.raises(InvalidInputError):
        grid_peak_oracle(sphere(3))
    with pytest.raises(InvalidInputError):
        grid_peak_oracle(equal_maxima(), resolution=100)


def test_lookup():
    assert get_benchmark("Equal_Maxima").name == "equal-maxima"
    assert get_benchmark("sphere", 5).dimension == 5
    with pytest.raises(InvalidInputError):
        get_benchmark("rastrigin")
    with pytest.raises(InvalidInputError):
        get_benchmark("himmelblau", 3)
    prob = equal_maxima().as_problem()
    assert prob.name == "bench:equal-maxima" and len(prob.known_peaks) == 5
