import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracsim.fode import TimeSeries
from fracsim.glops import MemoryPolicy, frac_diff, gl_coeffs, memory_length


def binomial_coeff(order: float, j: int) -> float:
    """Direct signed-binomial evaluation, independent of the recurrence."""
    out = 1.0
    for i in range(j):
        out *= (order - i) / (i + 1)
    return (-1) ** j * out


class TestGlCoeffs:
    def test_first_difference(self):
        c = gl_coeffs(1.0, 4)
        assert list(c.values) == [1.0, -1.0, 0.0, 0.0]

    def test_order_22(self):
        c = gl_coeffs(2.2, 5)
        assert np.allclose(c.values, [1.0, -2.2, 1.32, -0.088, -0.0176], rtol=1e-14)

    def test_order_09(self):
        c = gl_coeffs(0.9, 3)
        assert np.allclose(c.values, [1.0, -0.9, -0.045], rtol=1e-14)

    @pytest.mark.parametrize("order", [0.5, 0.9, 1.0, 2.0, 2.2])
    def test_recurrence_matches_binomial(self, order):
        c = gl_coeffs(order, 51)
        for j in range(51):
            assert c.values[j] == pytest.approx(binomial_coeff(order, j), rel=1e-12, abs=1e-300)

    @pytest.mark.parametrize("order", [1.0, 2.0, 3.0])
    def test_integer_order_tail_exactly_zero(self, order):
        c = gl_coeffs(order, 40)
        assert np.all(c.values[int(order) + 1 :] == 0.0)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(min_value=0.05, max_value=4.0), st.integers(min_value=1, max_value=30))
    def test_recurrence_property(self, order, j):
        c = gl_coeffs(order, j + 1)
        # abs floor covers near-integer orders where the coefficient itself
        # underflows toward zero and relative comparison is meaningless
        assert c.values[j] == pytest.approx(binomial_coeff(order, j), rel=1e-10, abs=1e-13)

    @pytest.mark.parametrize("order", [0.5, 0.9, 2.2])
    def test_partial_sums_shrink(self, order):
        c = gl_coeffs(order, 1001).values
        assert abs(c[:1001].sum()) < abs(c[:101].sum())

    def test_validation(self):
        with pytest.raises(ValueError):
            gl_coeffs(-0.5, 3)
        with pytest.raises(ValueError):
            gl_coeffs(1.0, 0)


class TestMemoryLength:
    def test_unit_order(self):
        assert memory_length(0.1, 1.0) == pytest.approx(100.0, rel=1e-12)

    def test_order_22(self):
        assert memory_length(0.01, 2.2) == pytest.approx(8237.44447601, abs=0.1)

    def test_half_order(self):
        assert memory_length(0.05, 0.5) == pytest.approx(127.323954474, abs=0.01)

    def test_validation(self):
        with pytest.raises(ValueError):
            memory_length(0.0, 1.0)
        with pytest.raises(ValueError):
            memory_length(1.5, 1.0)


def series(fn, h, t_end):
    t = np.arange(0.0, t_end + h / 2, h)
    return TimeSeries(h=h, t0=0.0, samples=fn(t))


class TestFracDiff:
    def test_ramp_first_derivative(self):
        y = series(lambda t: t, 0.1, 5.0)
        d = frac_diff(y, 1.0)
        assert np.allclose(d.samples[1:], 1.0, atol=1e-12)

    def test_parabola_second_derivative(self):
        y = series(lambda t: t * t, 0.01, 2.0)
        d = frac_diff(y, 2.0)
        assert np.allclose(d.samples[2:], 2.0, atol=1e-9)

    def test_half_derivative_of_step(self):
        # unit step sampled from t=0; d^0.5 step = t^-0.5 / Gamma(0.5)
        y = series(lambda t: np.ones_like(t), 0.01, 2.0)
        d = frac_diff(y, 0.5)
        assert d.at(1.0) == pytest.approx(0.564189583548, abs=0.01)

    def test_order_zero_is_identity(self):
        y = series(np.sin, 0.05, 3.0)
        d = frac_diff(y, 0.0)
        assert np.array_equal(d.samples, y.samples)

    def test_half_half_composes_to_first(self):
        y = series(lambda t: np.sin(t) * t, 0.01, 5.0)
        twice = frac_diff(frac_diff(y, 0.5), 0.5)
        once = frac_diff(y, 1.0)
        rms = np.sqrt(np.mean((twice.samples[1:] - once.samples[1:]) ** 2))
        scale = np.sqrt(np.mean(once.samples[1:] ** 2))
        assert rms <= 0.02 * scale

    def test_short_memory_close_to_full(self):
        y = series(lambda t: np.sin(t), 0.01, 20.0)
        full = frac_diff(y, 0.5)
        short = frac_diff(y, 0.5, MemoryPolicy.error_bound(0.01))
        err = np.abs(full.samples - short.samples).max()
        assert err <= 0.01 * np.abs(full.samples).max() * 1.5

    def test_empty_series_rejected(self):
        with pytest.raises(ValueError):
            frac_diff(TimeSeries(h=0.1, t0=0.0, samples=np.array([])), 0.5)


def test_policy_validation():
    with pytest.raises(ValueError):
        MemoryPolicy("bogus")
    with pytest.raises(ValueError):
        MemoryPolicy.fixed(-1.0)
    with pytest.raises(ValueError):
        MemoryPolicy.error_bound(2.0)
    assert MemoryPolicy.full().window_samples(0.1, 0.5, 1000) == 1000
    assert MemoryPolicy.fixed(10.0).window_samples(0.1, 0.5, 1000) == 100
