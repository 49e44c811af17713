"""Grunwald-Letnikov weights, short-memory window selection, fractional
differentiation of sampled signals."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from . import specfun
from ._kernels import get_backend

__all__ = ["GlCoeffs", "MemoryPolicy", "gl_coeffs", "memory_length", "frac_diff"]


@dataclass(frozen=True)
class GlCoeffs:
    """Signed-binomial weights b_j = (-1)^j C(order, j), j = 0..len-1."""

    order: float
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)


_cache: dict[float, np.ndarray] = {}
_cache_lock = threading.Lock()


def _coeff_array(order: float, count: int) -> np.ndarray:
    arr = _cache.get(order)
    if arr is None or len(arr) < count:
        n = max(count, 64)
        new = np.empty(n)
        new[0] = 1.0
        for j in range(1, n):
            new[j] = (1.0 - (1.0 + order) / j) * new[j - 1]
        new.setflags(write=False)
        with _cache_lock:
            # concurrent insert is idempotent; keep the longest
            cur = _cache.get(order)
            if cur is None or len(cur) < n:
                _cache[order] = new
            arr = _cache[order]
    return arr


def gl_coeffs(order: float, count: int) -> GlCoeffs:
    """Weights via the one-term recurrence b_j = (1 - (1+order)/j) b_{j-1}.

    For integer ``order`` the tail beyond j = order is exactly zero, so the
    same weights double as classical finite-difference stencils.
    """
    if not math.isfinite(order) or order < 0:
        raise ValueError(f"order must be finite and >= 0, got {order}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    return GlCoeffs(order, _coeff_array(order, count)[:count])


def memory_length(delta0: float, order: float) -> float:
    """Minimal history window (seconds) keeping the normalized truncation
    error of the short-memory sum below ``delta0``: L = 1/(delta0 Gamma(order))^2."""
    if not 0 < delta0 <= 1:
        raise ValueError(f"delta0 must be in (0, 1], got {delta0}")
    if order <= 0:
        raise ValueError(f"order must be > 0, got {order}")
    g = specfun.gamma(order)
    return 1.0 / (delta0 * delta0 * g * g)


@dataclass(frozen=True)
class MemoryPolicy:
    """History-window rule for the GL sums.

    ``full`` uses the entire history, ``fixed_length`` caps it at L seconds,
    ``error_bound`` derives L from the admissible normalized error delta0.
    """

    mode: str = "full"
    L: float | None = None
    delta0: float | None = None

    def __post_init__(self):
        if self.mode not in ("full", "fixed_length", "error_bound"):
            raise ValueError(f"unknown memory mode {self.mode!r}")
        if self.mode == "fixed_length" and (self.L is None or self.L <= 0):
            raise ValueError("fixed_length mode needs L > 0")
        if self.mode == "error_bound" and (self.delta0 is None or not 0 < self.delta0 <= 1):
            raise ValueError("error_bound mode needs delta0 in (0, 1]")

    @classmethod
    def full(cls) -> "MemoryPolicy":
        return cls("full")

    @classmethod
    def fixed(cls, L: float) -> "MemoryPolicy":
        return cls("fixed_length", L=L)

    @classmethod
    def error_bound(cls, delta0: float) -> "MemoryPolicy":
        return cls("error_bound", delta0=delta0)

    def window_samples(self, h: float, order: float, n: int) -> int:
        """Cap on the number of history samples for a term of this order."""
        if self.mode == "full":
            return n
        if self.mode == "fixed_length":
            return min(n, int(self.L / h))
        if order <= 0:
            return n  # zero-order terms carry no history
        return min(n, int(memory_length(self.delta0, order) / h))


def frac_diff(y, order: float, policy: MemoryPolicy = MemoryPolicy.full()):
    """GL fractional derivative of a uniformly sampled signal.

    output[m] = h^-order * sum_j b_j y[m-j], window per ``policy``; samples
    before the series origin are taken as zero.
    """
    from .fode import TimeSeries  # local import to avoid a cycle

    samples = np.asarray(y.samples, dtype=float)
    if samples.size == 0:
        raise ValueError("cannot differentiate an empty series")
    n = samples.size
    coeffs = _coeff_array(order, n)
    cap = policy.window_samples(y.h, order, n)
    out = get_backend().frac_diff(coeffs, samples, y.h ** (-order), cap)
    return TimeSeries(h=y.h, t0=y.t0, samples=out)
