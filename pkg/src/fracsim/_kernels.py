"""Hot inner loops of the GL solver, with a numba and a pure-numpy backend.

Backend selection: environment variable ``FRACSIM_BACKEND`` set to ``numba``
or ``numpy``.  Default is numba when importable, numpy otherwise.  The two
backends associate the inner history sums differently (BLAS dot vs a
sequential loop), so results agree to rounding (~1e-12 relative on the
reference scenarios, pinned by the parity test) but are not bit-identical.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["get_backend", "backend_name"]


def _solve_numpy(coeffs_l, scales_l, caps_l, coeffs_r, scales_r, caps_r,
                 w, y, start_m, denom, div_limit):
    """Explicit GL recurrence; returns the index where |y| first exceeded
    ``div_limit`` or -1."""
    n = w.shape[0]
    for m in range(start_m, n):
        acc = 0.0
        wrev = w[m::-1]
        yrev = y[m - 1::-1] if m >= 1 else w[:0]
        for k in range(coeffs_r.shape[0]):
            jmax = min(m, caps_r[k])
            acc += scales_r[k] * np.dot(coeffs_r[k, : jmax + 1], wrev[: jmax + 1])
        for i in range(coeffs_l.shape[0]):
            jmax = min(m, caps_l[i])
            if jmax >= 1:
                acc -= scales_l[i] * np.dot(coeffs_l[i, 1 : jmax + 1], yrev[:jmax])
        ym = acc / denom
        y[m] = ym
        if abs(ym) > div_limit:
            return m
    return -1


def _frac_diff_numpy(coeffs, samples, scale, cap):
    n = samples.shape[0]
    out = np.empty(n)
    for m in range(n):
        jmax = min(m, cap - 1) if cap >= 1 else m
        out[m] = scale * np.dot(coeffs[: jmax + 1], samples[m::-1][: jmax + 1])
    return out


class _NumpyBackend:
    name = "numpy"
    solve = staticmethod(_solve_numpy)
    frac_diff = staticmethod(_frac_diff_numpy)


def _build_numba_backend():
    from numba import njit

    @njit(cache=True)
    def solve(coeffs_l, scales_l, caps_l, coeffs_r, scales_r, caps_r,
              w, y, start_m, denom, div_limit):
        n = w.shape[0]
        for m in range(start_m, n):
            acc = 0.0
            for k in range(coeffs_r.shape[0]):
                jmax = min(m, caps_r[k])
                s = 0.0
                for j in range(jmax + 1):
                    s += coeffs_r[k, j] * w[m - j]
                acc += scales_r[k] * s
            for i in range(coeffs_l.shape[0]):
                jmax = min(m, caps_l[i])
                s = 0.0
                for j in range(1, jmax + 1):
                    s += coeffs_l[i, j] * y[m - j]
                acc -= scales_l[i] * s
            ym = acc / denom
            y[m] = ym
            if abs(ym) > div_limit:
                return m
        return -1

    @njit(cache=True)
    def frac_diff(coeffs, samples, scale, cap):
        n = samples.shape[0]
        out = np.empty(n)
        for m in range(n):
            jmax = m
            if cap >= 1 and cap - 1 < m:
                jmax = cap - 1
            s = 0.0
            for j in range(jmax + 1):
                s += coeffs[j] * samples[m - j]
            out[m] = scale * s
        return out

    class _NumbaBackend:
        name = "numba"

    _NumbaBackend.solve = staticmethod(solve)
    _NumbaBackend.frac_diff = staticmethod(frac_diff)
    return _NumbaBackend


_backend = None


def get_backend():
    global _backend
    if _backend is None:
        choice = os.environ.get("FRACSIM_BACKEND", "").lower()
        if choice not in ("", "numba", "numpy"):
            raise ValueError(f"FRACSIM_BACKEND must be 'numba' or 'numpy', got {choice!r}")
        if choice == "numpy":
            _backend = _NumpyBackend
        else:
            try:
                _backend = _build_numba_backend()
            except ImportError:
                if choice == "numba":
                    raise
                _backend = _NumpyBackend
    return _backend


def backend_name() -> str:
    return get_backend().name
