"""PD regulator design, closed-loop composition, response quality metrics
and an empirical stability probe."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fode import Fode, FracTerm, Grid, TimeSeries, solve_step, unit_step

__all__ = [
    "PdController",
    "DesignTargets",
    "Metrics",
    "design_pd",
    "close_loop",
    "response_metrics",
    "stability_probe",
]


@dataclass(frozen=True)
class PdController:
    """Regulator K + Td s^delta; delta = 1 is the ordinary PD."""

    K: float
    Td: float
    delta: float = 1.0

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be > 0")


@dataclass(frozen=True)
class DesignTargets:
    """Dominant closed-loop pole pair at -St +- j(St/Tl): St is the distance
    left of the imaginary axis, Tl the |Re|/|Im| ratio."""

    St: float
    Tl: float

    def __post_init__(self):
        if self.St <= 0 or self.Tl <= 0:
            raise ValueError("St and Tl must be > 0")

    @property
    def poles(self) -> complex:
        return complex(-self.St, self.St / self.Tl)


@dataclass(frozen=True)
class Metrics:
    regulation_area: float
    permanent_deviation: float  # percent
    overshoot: float
    classification: str


def design_pd(a2: float, a1: float, a0: float, targets: DesignTargets) -> PdController:
    """Place the closed-loop pair of a2 y'' + (a1+Td) y' + (a0+K) y at the
    target poles: Td = 2 St a2 - a1, K = a2 (St^2 + (St/Tl)^2) - a0."""
    if a2 <= 0:
        raise ValueError("a2 must be > 0")
    Td = 2.0 * targets.St * a2 - a1
    K = a2 * (targets.St**2 + (targets.St / targets.Tl) ** 2) - a0
    if Td <= 0:
        raise ValueError(f"targets unreachable: derivative gain Td = {Td} <= 0")
    return PdController(K=K, Td=Td, delta=1.0)


def close_loop(plant: Fode, c: PdController) -> Fode:
    """Unity-feedback loop of the plant with regulator K + Td s^delta.

    The plant must have the pure-gain right-hand side [(1, 0)].  Regulator
    terms merge into the output side; the input side becomes K w + Td w^(delta).
    """
    if len(plant.rhs) != 1 or plant.rhs[0] != FracTerm(1.0, 0.0):
        raise ValueError("plant rhs must be the pure gain [(1, 0)]")
    max_order = max(t.order for t in plant.lhs)
    if c.delta >= max_order:
        raise ValueError("regulator derivative order must stay below the plant order")
    lhs = list(plant.lhs) + [(c.Td, c.delta), (c.K, 0.0)]
    rhs = [(c.K, 0.0), (c.Td, c.delta)]
    return Fode(lhs=lhs, rhs=rhs, y0=plant.y0, aux0=plant.aux0)


def response_metrics(y: TimeSeries, w: TimeSeries, horizon: float) -> Metrics:
    """Regulation quality over [0, horizon].

    Area is the rectangle-rule integral of |w - y|; the permanent deviation
    is the mean error over the last 5% of the window, in percent of the
    setpoint; overshoot is max(y) above that tail mean, relative to it.
    """
    if abs(y.h - w.h) > 1e-12 or abs(y.t0 - w.t0) > 1e-12:
        raise ValueError("series must share a grid")
    n = int(round(horizon / y.h)) + 1
    if n > len(y.samples) or n > len(w.samples):
        raise ValueError("horizon exceeds the series")
    ys = np.asarray(y.samples[:n], dtype=float)
    ws = np.asarray(w.samples[:n], dtype=float)
    err = ws - ys
    area = y.h * float(np.abs(err).sum())
    tail = max(1, int(math.ceil(0.05 * n)))
    w_ref = float(np.mean(ws[-tail:]))
    y_tail = float(np.mean(ys[-tail:]))
    deviation = abs(w_ref - y_tail) / abs(w_ref) * 100.0 if w_ref else 0.0
    overshoot = max(0.0, (float(ys.max()) - y_tail) / abs(y_tail)) if y_tail else 0.0
    return Metrics(area, deviation, overshoot, "stable")


# envelope ratio thresholds for the probe classification
_UNSTABLE_GROWTH = 1.10
_BORDERLINE_FLOOR = 0.10


def stability_probe(loop: Fode, grid: Grid) -> str:
    """Classify a closed loop by simulating its step response.

    The probe compares the peak deviation from the settled value over the
    first and last quarters of the window.  unstable: the solver diverged
    or the envelope grew by >= 10%; borderline: the envelope kept more
    than 10% of its initial size (slow, lightly damped decay); stable:
    the envelope collapsed below that floor.
    """
    y = solve_step(loop, grid)
    if y.diverged_at is not None or not np.all(np.isfinite(y.samples)):
        return "unstable"
    ys = np.asarray(y.samples, dtype=float)
    n = len(ys)
    final = float(np.mean(ys[int(0.75 * n):]))
    env = np.abs(ys - final)
    q1 = float(env[: n // 4].max())
    q4 = float(env[3 * n // 4:].max())
    if q1 == 0:
        return "stable"
    ratio = q4 / q1
    if ratio >= _UNSTABLE_GROWTH:
        return "unstable"
    if ratio > _BORDERLINE_FLOOR:
        return "borderline"
    return "stable"


def closed_loop_metrics(loop: Fode, grid: Grid, horizon: float) -> Metrics:
    """Simulate the loop and compute metrics plus the probe classification."""
    y = solve_step(loop, grid)
    w = unit_step(grid)
    m = response_metrics(y, w, horizon)
    return Metrics(m.regulation_area, m.permanent_deviation, m.overshoot,
                   stability_probe(loop, grid))
