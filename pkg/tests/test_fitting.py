import numpy as np
import pytest

from fracsim.fitting import (
    FitSpec,
    fit_integer_second_order,
    nelder_mead,
    simulate_candidate,
)
from fracsim.fode import Grid, plant, solve_step


class TestNelderMead:
    def test_quadratic_bowl(self):
        x, f, it, ok = nelder_mead(lambda v: (v[0] - 3.0) ** 2 + (v[1] + 1.0) ** 2,
                                   [0.0, 0.0])
        assert ok
        assert x == pytest.approx([3.0, -1.0], abs=1e-5)
        assert f < 1e-10

    def test_rosenbrock(self):
        rosen = lambda v: (1 - v[0]) ** 2 + 100 * (v[1] - v[0] ** 2) ** 2
        x, f, it, ok = nelder_mead(rosen, [-1.2, 1.0], max_iters=5000)
        assert ok
        assert x == pytest.approx([1.0, 1.0], abs=1e-4)

    def test_one_dimensional(self):
        x, f, it, ok = nelder_mead(lambda v: (v[0] - 0.25) ** 4, [5.0])
        assert x[0] == pytest.approx(0.25, abs=1e-6)

    def test_iteration_budget(self):
        x, f, it, ok = nelder_mead(lambda v: v[0] ** 2, [100.0], max_iters=3)
        assert it == 3
        assert not ok


def test_simulate_candidate_matches_direct_model():
    g = Grid(h=0.05, t_end=5.0)
    y = simulate_candidate(0.7, 0.3, 1.0, g)
    from fracsim.fode import Fode

    ref = solve_step(Fode(lhs=[(0.7, 2.0), (0.3, 1.0), (1.0, 0.0)], rhs=[(1.0, 0.0)]), g)
    assert np.array_equal(y.samples, ref.samples)


def test_simulate_candidate_validation():
    with pytest.raises(ValueError):
        simulate_candidate(0.0, 0.3, 1.0, Grid(h=0.1, t_end=1.0))


class TestFitSpec:
    def test_unknown_param(self):
        g = Grid(h=0.1, t_end=1.0)
        t = simulate_candidate(1.0, 1.0, 1.0, g)
        with pytest.raises(ValueError):
            FitSpec(target=t, grid=g, free_params={"a7"})
        with pytest.raises(ValueError):
            FitSpec(target=t, grid=g, free_params=set())

    def test_grid_mismatch(self):
        g = Grid(h=0.1, t_end=1.0)
        t = simulate_candidate(1.0, 1.0, 1.0, Grid(h=0.1, t_end=2.0))
        with pytest.raises(ValueError):
            FitSpec(target=t, grid=g)


class TestFit:
    def test_self_fit_recovers_exactly(self):
        g = Grid(h=0.1, t_end=10.0)
        target = simulate_candidate(0.7, 0.3, 1.0, g)
        r = fit_integer_second_order(
            FitSpec(target=target, grid=g, init=(1.0, 1.0, 1.0))
        )
        assert r.converged
        assert r.objective < 1e-8
        assert r.a2 == pytest.approx(0.7, abs=1e-4)
        assert r.a1 == pytest.approx(0.3, abs=1e-4)
        assert r.a0 == 1.0  # pinned

    def test_three_parameter_self_fit(self):
        g = Grid(h=0.1, t_end=8.0)
        target = simulate_candidate(0.5, 0.8, 2.0, g)
        r = fit_integer_second_order(
            FitSpec(target=target, grid=g, free_params={"a2", "a1", "a0"},
                    init=(1.0, 1.0, 1.0))
        )
        assert r.objective < 1e-7
        assert r.a0 == pytest.approx(2.0, abs=1e-3)

    def test_fractional_plant_fit(self):
        # the 2.2/0.9-order plant admits a decent integer surrogate; on a
        # fine grid the fitted leading coefficients settle near 0.74 / 0.23
        g = Grid(h=0.02, t_end=10.0)
        target = solve_step(plant(0.8, 2.2, 0.5, 0.9, 1.0), g)
        r = fit_integer_second_order(FitSpec(target=target, grid=g))
        assert r.a2 == pytest.approx(0.7414, abs=0.02)
        assert r.a1 == pytest.approx(0.2313, abs=0.02)

    def test_degenerate_target_rejected(self):
        g = Grid(h=0.1, t_end=1.0)
        t = simulate_candidate(1.0, 1.0, 1.0, g)
        zero = type(t)(h=t.h, t0=t.t0, samples=np.zeros_like(t.samples))
        with pytest.raises(ValueError):
            fit_integer_second_order(FitSpec(target=zero, grid=g))
