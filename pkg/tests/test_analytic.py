import pytest

from fracsim.analytic import (
    SeriesBudget,
    SeriesDivergence,
    step_closed_fpd,
    step_closed_ipd,
    step_open,
)

PLANT = (0.8, 0.5, 1.0, 2.2, 0.9)  # a2, a1, a0, alpha, beta
K, TD = 20.5, 2.7343
TDF, DELTA = 3.7343, 1.15

WORKING = SeriesBudget()
EXTENDED = SeriesBudget(precision_mode="double_double")

# frozen 60-digit brute-force series values; the closed-loop entries carry a
# per-time tolerance because the printed series drifts off the exact response
# as t grows (see the docs) and truncation depth shifts the computed value
OPEN_VALUES = {
    0.5: 0.10493230313681977,
    1.0: 0.42397625245014688,
    2.0: 1.2692839016068944,
    5.0: 0.58508299274264339,
    10.0: 0.8203325185879341,
}
IPD_VALUES = [
    (0.5, 1.4782234066927335, 1e-12),
    (1.0, 0.85481965054862138, 1e-11),
    (2.0, 1.1678888684404038, 1e-9),
    (3.0, 0.96810033699745893, 1e-6),
    (4.0, 0.90042080377190225, 1e-4),
]
FPD_VALUES = [
    (0.5, 1.2876522546263771, 1e-12),
    (1.0, 0.95792734125591288, 1e-11),
    (2.0, 0.98236860677106688, 1e-8),
    (3.0, 0.94185823754563361, 1e-5),
    (4.0, 0.95335909190025507, 3e-3),
]


class TestBudget:
    def test_validation(self):
        with pytest.raises(ValueError):
            SeriesBudget(outer_terms=5)
        with pytest.raises(ValueError):
            SeriesBudget(tol=0.0)
        with pytest.raises(ValueError):
            SeriesBudget(precision_mode="quad")


class TestOpen:
    def test_zero_time(self):
        assert step_open(*PLANT, 0.0) == 0.0

    @pytest.mark.parametrize("t,expected", sorted(OPEN_VALUES.items()))
    def test_working_mode(self, t, expected):
        # cancellation grows with t; at t=10 the peak term is ~1e14
        tol = 1e-13 if t <= 2 else (1e-12 if t <= 5 else 1e-8)
        assert step_open(*PLANT, t, WORKING) == pytest.approx(expected, rel=tol)

    @pytest.mark.parametrize("t,expected", sorted(OPEN_VALUES.items()))
    def test_extended_mode(self, t, expected):
        got = step_open(*PLANT, t, EXTENDED)
        assert got == pytest.approx(expected, rel=1e-13)

    def test_validation(self):
        with pytest.raises(ValueError):
            step_open(0.0, 0.5, 1.0, 2.2, 0.9, 1.0)
        with pytest.raises(ValueError):
            step_open(0.8, 0.5, 1.0, 0.9, 2.2, 1.0)
        with pytest.raises(ValueError):
            step_open(*PLANT, -1.0)


class TestClosedIpd:
    def test_zero_time(self):
        assert step_closed_ipd(*PLANT, K, TD, 0.0) == 0.0

    @pytest.mark.parametrize("t,expected,tol", IPD_VALUES)
    def test_working_mode(self, t, expected, tol):
        assert step_closed_ipd(*PLANT, K, TD, t, WORKING) == pytest.approx(expected, rel=tol)

    @pytest.mark.parametrize("t,expected,tol", IPD_VALUES)
    def test_extended_mode(self, t, expected, tol):
        got = step_closed_ipd(*PLANT, K, TD, t, EXTENDED)
        assert got == pytest.approx(expected, rel=tol)

    def test_budget_exhaustion_raises(self):
        with pytest.raises(SeriesDivergence):
            step_closed_ipd(*PLANT, K, TD, 10.0, SeriesBudget(outer_terms=20))

    def test_validation(self):
        with pytest.raises(ValueError):
            step_closed_ipd(0.8, 0.5, 1.0, 0.9, 0.5, K, TD, 1.0)  # alpha <= 1
        with pytest.raises(ValueError):
            step_closed_ipd(*PLANT, 0.0, TD, 1.0)


class TestClosedFpd:
    def test_zero_time(self):
        assert step_closed_fpd(*PLANT, K, TDF, DELTA, 0.0) == 0.0

    @pytest.mark.parametrize("t,expected,tol", FPD_VALUES)
    def test_working_mode(self, t, expected, tol):
        got = step_closed_fpd(*PLANT, K, TDF, DELTA, t, WORKING)
        assert got == pytest.approx(expected, rel=tol)

    @pytest.mark.parametrize("t,expected,tol", FPD_VALUES)
    def test_extended_mode(self, t, expected, tol):
        got = step_closed_fpd(*PLANT, K, TDF, DELTA, t, EXTENDED)
        assert got == pytest.approx(expected, rel=tol)

    def test_unit_delta_matches_integer_regulator_series(self):
        # delta = 1 describes the same loop as the integer-derivative form,
        # through a structurally different double sum
        a = step_closed_ipd(*PLANT, K, TD, 1.0, EXTENDED)
        b = step_closed_fpd(*PLANT, K, TD, 1.0, 1.0, EXTENDED)
        assert a == pytest.approx(b, rel=1e-10)

    def test_validation(self):
        with pytest.raises(ValueError):
            step_closed_fpd(*PLANT, K, TDF, 2.5, 1.0)  # delta >= alpha
        with pytest.raises(ValueError):
            step_closed_fpd(*PLANT, K, TDF, 0.0, 1.0)
