"""Least-squares approximation of a fractional plant by an integer
second-order model, driven by a Nelder-Mead simplex search."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fode import Fode, Grid, TimeSeries, solve_step

__all__ = ["FitSpec", "FitResult", "simulate_candidate", "nelder_mead", "fit_integer_second_order"]


def simulate_candidate(a2: float, a1: float, a0: float, grid: Grid) -> TimeSeries:
    """Step response of a2 y'' + a1 y' + a0 y = u on the given grid."""
    if a2 <= 0 or a0 <= 0:
        raise ValueError("need a2 > 0 and a0 > 0")
    model = Fode(lhs=[(a2, 2.0), (a1, 1.0), (a0, 0.0)], rhs=[(1.0, 0.0)])
    return solve_step(model, grid)


def nelder_mead(objective, init, ftol: float = 1e-12, max_iters: int = 2000,
                step: float = 0.1, xtol: float = 1e-9):
    """Simplex descent with the standard coefficients (reflection 1,
    expansion 2, contraction 0.5, shrink 0.5).

    Returns (best_x, best_f, iterations, converged); converged means the
    spread of simplex objective values fell below ftol relative to the
    best value and the simplex diameter below xtol (a value-only test can
    stop early on a symmetric tie across the minimum).
    """
    x0 = np.asarray(init, dtype=float)
    n = x0.size
    simplex = [x0.copy()]
    for i in range(n):
        v = x0.copy()
        v[i] += step * (abs(v[i]) if v[i] != 0 else 1.0)
        simplex.append(v)
    fvals = [objective(v) for v in simplex]

    it = 0
    converged = False
    while it < max_iters:
        it += 1
        order = np.argsort(fvals)
        simplex = [simplex[i] for i in order]
        fvals = [fvals[i] for i in order]
        diam = max(np.abs(v - simplex[0]).max() for v in simplex[1:])
        if (fvals[-1] - fvals[0] < ftol * (1.0 + abs(fvals[0]))
                and diam < xtol * (1.0 + np.abs(simplex[0]).max())):
            converged = True
            break
        centroid = np.mean(simplex[:-1], axis=0)
        xr = centroid + (centroid - simplex[-1])
        fr = objective(xr)
        if fr < fvals[0]:
            xe = centroid + 2.0 * (centroid - simplex[-1])
            fe = objective(xe)
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
        elif fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
        else:
            if fr < fvals[-1]:
                xc = centroid + 0.5 * (xr - centroid)
            else:
                xc = centroid + 0.5 * (simplex[-1] - centroid)
            fc = objective(xc)
            if fc < min(fr, fvals[-1]):
                simplex[-1], fvals[-1] = xc, fc
            else:
                # shrink toward the best vertex
                for i in range(1, n + 1):
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    fvals[i] = objective(simplex[i])
    best = int(np.argmin(fvals))
    return np.array(simplex[best]), float(fvals[best]), it, converged


@dataclass(frozen=True)
class FitSpec:
    target: TimeSeries
    grid: Grid
    free_params: frozenset = frozenset({"a2", "a1"})
    init: tuple = (1.0, 1.0, 1.0)
    max_iters: int = 2000
    ftol: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "free_params", frozenset(self.free_params))
        bad = self.free_params - {"a2", "a1", "a0"}
        if bad:
            raise ValueError(f"unknown free parameters {sorted(bad)}")
        if not self.free_params:
            raise ValueError("at least one parameter must be free")
        if self.init[0] <= 0 or self.init[2] <= 0:
            raise ValueError("init values for a2 and a0 must be positive")
        if len(self.target.samples) != self.grid.n_samples:
            raise ValueError("target must live on the fit grid")


@dataclass(frozen=True)
class FitResult:
    a2: float
    a1: float
    a0: float
    objective: float
    iterations: int
    converged: bool


def fit_integer_second_order(spec: FitSpec) -> FitResult:
    """Minimize sum of squared step-response differences over the free
    coefficients, the rest pinned at their init values."""
    target = np.asarray(spec.target.samples, dtype=float)
    if not np.all(np.isfinite(target)):
        raise ValueError("target contains non-finite samples")
    if np.all(target == 0):
        raise ValueError("degenerate all-zero target")

    names = [p for p in ("a2", "a1", "a0") if p in spec.free_params]
    fixed = dict(zip(("a2", "a1", "a0"), spec.init))

    def unpack(x):
        p = dict(fixed)
        p.update(zip(names, x))
        return p["a2"], p["a1"], p["a0"]

    def objective(x):
        a2, a1, a0 = unpack(x)
        if a2 <= 0 or a0 <= 0:
            return np.inf
        y = solve_step(
            Fode(lhs=[(a2, 2.0), (a1, 1.0), (a0, 0.0)], rhs=[(1.0, 0.0)]), spec.grid
        )
        if y.diverged_at is not None:
            return np.inf
        return float(np.sum((target - y.samples) ** 2))

    x0 = np.array([fixed[p] for p in names])
    best, fbest, iters, converged = nelder_mead(
        objective, x0, ftol=spec.ftol, max_iters=spec.max_iters
    )
    a2, a1, a0 = unpack(best)
    return FitResult(a2, a1, a0, fbest, iters, converged)
