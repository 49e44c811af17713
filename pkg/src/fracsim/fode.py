"""Fractional-order LTI equations and the explicit recurrent step solver.

An equation is a list of (coefficient, order) terms acting on the output
plus a list acting on the input.  The solver discretizes every derivative
with GL weights and advances one explicit recurrence; integer orders come
out as ordinary finite differences because the GL weight tail of an integer
order vanishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import get_backend
from .glops import MemoryPolicy, _coeff_array

__all__ = [
    "FracTerm",
    "Fode",
    "Grid",
    "TimeSeries",
    "unit_step",
    "solve_step",
    "y1_legacy",
    "plant",
    "DegenerateDenominatorError",
]

DIVERGENCE_LIMIT = 1e12


class DegenerateDenominatorError(ZeroDivisionError):
    """The recurrence denominator vanished for this model/grid pair."""


@dataclass(frozen=True)
class FracTerm:
    coeff: float
    order: float

    def __post_init__(self):
        if not math.isfinite(self.coeff):
            raise ValueError("coefficient must be finite")
        if not (math.isfinite(self.order) and self.order >= 0):
            raise ValueError(f"order must be finite and >= 0, got {self.order}")


def _merge(terms) -> tuple[FracTerm, ...]:
    by_order: dict[float, float] = {}
    for t in terms:
        t = t if isinstance(t, FracTerm) else FracTerm(*t)
        by_order[t.order] = by_order.get(t.order, 0.0) + t.coeff
    return tuple(FracTerm(c, o) for o, c in sorted(by_order.items(), reverse=True))


@dataclass(frozen=True)
class Fode:
    """lhs terms act on the output, rhs terms on the input; duplicate orders
    merge on construction.  y0 is the initial output value, aux0 the initial
    value of the lowest non-zero-order derivative."""

    lhs: tuple[FracTerm, ...]
    rhs: tuple[FracTerm, ...]
    y0: float = 0.0
    aux0: float = 0.0

    def __init__(self, lhs, rhs, y0: float = 0.0, aux0: float = 0.0):
        lhs = _merge(lhs)
        rhs = _merge(rhs)
        if not lhs or not rhs:
            raise ValueError("lhs and rhs must be non-empty")
        if max(t.order for t in lhs) <= max(t.order for t in rhs):
            raise ValueError("system must be proper: max lhs order > max rhs order")
        object.__setattr__(self, "lhs", lhs)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "y0", float(y0))
        object.__setattr__(self, "aux0", float(aux0))

    @property
    def dc_gain(self) -> float | None:
        """Steady-state step gain r0/a0, or None if a zero-order lhs term is absent."""
        a0 = next((t.coeff for t in self.lhs if t.order == 0), None)
        if a0 is None or a0 == 0:
            return None
        r0 = next((t.coeff for t in self.rhs if t.order == 0), 0.0)
        return r0 / a0


def plant(a2: float, alpha: float, a1: float, beta: float, a0: float) -> Fode:
    """Single-input plant a2 y^(alpha) + a1 y^(beta) + a0 y = u."""
    return Fode(lhs=[(a2, alpha), (a1, beta), (a0, 0.0)], rhs=[(1.0, 0.0)])


@dataclass(frozen=True)
class Grid:
    h: float
    t_end: float
    policy: MemoryPolicy = field(default_factory=MemoryPolicy.full)
    init_mode: str = "direct"

    def __post_init__(self):
        if not 0 < self.h < 1:
            raise ValueError(f"h must be in (0, 1), got {self.h}")
        if self.t_end <= self.h:
            raise ValueError("t_end must exceed h")
        if self.t_end / self.h > 1e7:
            raise ValueError("grid would exceed 1e7 samples")
        if self.init_mode not in ("direct", "legacy"):
            raise ValueError(f"init_mode must be 'direct' or 'legacy', got {self.init_mode!r}")

    @property
    def n_samples(self) -> int:
        return int(math.floor(self.t_end / self.h + 1e-9)) + 1


@dataclass(frozen=True)
class TimeSeries:
    h: float
    t0: float
    samples: np.ndarray
    diverged_at: int | None = None

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(len(self.samples))

    def at(self, t: float) -> float:
        """Sample nearest to time t (t must sit on the grid)."""
        i = int(round((t - self.t0) / self.h))
        if not 0 <= i < len(self.samples) or abs(self.t0 + i * self.h - t) > 1e-9:
            raise ValueError(f"t={t} is not on the grid")
        return float(self.samples[i])


def unit_step(grid: Grid) -> TimeSeries:
    """Discrete unit step: 0 at the first sample, 1 afterwards."""
    w = np.ones(grid.n_samples)
    w[0] = 0.0
    return TimeSeries(h=grid.h, t0=0.0, samples=w)


def y1_legacy(model: Fode, grid: Grid) -> float:
    """First output sample from the initial conditions alone, using the
    weights of the lowest non-zero lhs order."""
    beta = min((t.order for t in model.lhs if t.order > 0), default=None)
    if beta is None:
        raise ValueError("model has no non-zero-order lhs term")
    c = _coeff_array(beta, 2)
    hb = grid.h ** (-beta)
    return (model.aux0 - model.y0 * c[1] * hb) / (c[0] * hb)


def _assemble(terms, h, n, policy, skip_j0_only: bool):
    """Coefficient table, h^-order scales and window caps for one side."""
    rows = []
    scales = np.empty(len(terms))
    caps = np.empty(len(terms), dtype=np.int64)
    for i, t in enumerate(terms):
        rows.append(_coeff_array(t.order, n)[:n])
        scales[i] = t.coeff * h ** (-t.order)
        caps[i] = policy.window_samples(h, t.order, n)
    return np.ascontiguousarray(np.vstack(rows)), scales, caps


def solve_step(model: Fode, grid: Grid, input_series: TimeSeries | None = None) -> TimeSeries:
    """Unit-step response by the explicit GL recurrence.

    y_m = [sum_k r_k h^-g_k sum_{j>=0} d_j w_{m-j}
           - sum_i a_i h^-o_i sum_{j>=1} b_j y_{m-j}] / sum_i a_i h^-o_i b_0

    ``direct`` init runs the recurrence from m = 1; ``legacy`` pins y_1 from
    the initial conditions and starts at m = 2.  A sample exceeding 1e12 in
    magnitude marks divergence: the series is truncated there and the index
    recorded on the result.
    """
    n = grid.n_samples
    w = (input_series.samples if input_series is not None else unit_step(grid).samples)
    w = np.asarray(w, dtype=float)
    if len(w) != n:
        raise ValueError("input series length does not match the grid")

    cl, sl, capl = _assemble(model.lhs, grid.h, n, grid.policy, True)
    cr, sr, capr = _assemble(model.rhs, grid.h, n, grid.policy, False)
    denom = float(np.dot(sl, cl[:, 0]))
    if denom == 0 or not math.isfinite(denom):
        raise DegenerateDenominatorError(f"recurrence denominator is {denom}")

    y = np.zeros(n)
    y[0] = model.y0
    start_m = 1
    if grid.init_mode == "legacy" and n > 1:
        y[1] = y1_legacy(model, grid)
        start_m = 2

    div = get_backend().solve(cl, sl, capl, cr, sr, capr, w, y, start_m, denom, DIVERGENCE_LIMIT)
    if div >= 0:
        return TimeSeries(h=grid.h, t0=0.0, samples=y[: div + 1], diverged_at=int(div))
    return TimeSeries(h=grid.h, t0=0.0, samples=y)
