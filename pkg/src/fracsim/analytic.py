"""Analytical unit-step responses via Mittag-Leffler series.

Three closed forms: the open-loop plant, the closed loop with an
integer-derivative regulator, and the closed loop with a fractional
regulator.  Each is an outer sum over derivative order m (closed loops add
an inner binomial sum) whose terms grow to enormous magnitude before
cancelling, so besides the compensated working-precision path there is an
extended-precision path ("double_double", 128-bit significand via gmpy2)
for the closed-loop series and for large times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .specfun import CompensatedSum, MlQuery, mittag_leffler

__all__ = [
    "SeriesBudget",
    "SeriesDivergence",
    "step_open",
    "step_closed_ipd",
    "step_closed_fpd",
]


class SeriesDivergence(ArithmeticError):
    """Series budget exhausted while terms were still growing; the value at
    this t is out of reach of direct summation (fall back to the numeric
    solver)."""


@dataclass(frozen=True)
class SeriesBudget:
    outer_terms: int = 120
    tol: float = 1e-12
    precision_mode: str = "working"
    ml_max_terms: int = 400

    def __post_init__(self):
        if self.outer_terms < 20:
            raise ValueError("outer_terms must be >= 20")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if self.precision_mode not in ("working", "double_double"):
            raise ValueError(f"unknown precision_mode {self.precision_mode!r}")


def _accumulate(terms, budget: SeriesBudget) -> float:
    """Sum an outer-term generator with the two-below-tol stopping rule."""
    acc = CompensatedSum()
    streak = 0
    prev = math.inf
    grew = False
    converged = False
    for term in terms:
        acc.add(term)
        a = abs(term)
        grew = a > prev
        prev = a
        if a < budget.tol * max(abs(acc.value), 1e-300):
            streak += 1
            if streak >= 2:
                converged = True
                break
        else:
            streak = 0
    if not converged and grew:
        raise SeriesDivergence("outer terms still growing at the budget limit")
    return acc.value


# ---------------------------------------------------------------------------
# working precision
# ---------------------------------------------------------------------------

def _ml(lam, mu, k, z, budget: SeriesBudget) -> float:
    return mittag_leffler(
        MlQuery(lam=lam, mu=mu, k=k, z=z, max_terms=budget.ml_max_terms, tol=1e-17)
    ).value


def _open_terms(a2, a1, a0, alpha, beta, t, budget):
    logt = math.log(t)
    r0 = a0 / a2
    z = -(a1 / a2) * t ** (alpha - beta)
    for m in range(budget.outer_terms):
        if r0 == 0.0 and m > 0:
            return
        ml = _ml(alpha - beta, alpha + beta * m + 1, m, z, budget)
        if ml == 0.0:
            yield 0.0
            continue
        log_mag = (
            -math.log(a2)
            - math.lgamma(m + 1)
            + (m * math.log(abs(r0)) if m else 0.0)
            + alpha * (m + 1) * logt
            + math.log(abs(ml))
        )
        sign = (-1.0) ** m * (math.copysign(1.0, r0) ** m) * math.copysign(1.0, ml)
        yield sign * math.exp(log_mag)


def _closed_terms(a2, a1, a0, alpha, beta, K, Td, delta, t, budget):
    """Shared shape of the two closed-loop series.

    delta is None for the integer-derivative loop (inner binomial runs over
    the plant's beta-order term, ML parameter alpha-1) and the derivative
    order of the regulator otherwise (binomial over the regulator term, ML
    parameter alpha-beta).
    """
    logt = math.log(t)
    A = a0 + K
    if delta is None:
        lam = alpha - 1.0
        z = -(Td / a2) * t ** (alpha - 1.0)
        log_w = math.log(a1 / A) if a1 else None  # inner weight ratio
    else:
        lam = alpha - beta
        z = -(a1 / a2) * t ** (alpha - beta)
        log_w = math.log(Td / A)
    log_K = math.log(K / a2)
    log_Td = math.log(abs(Td) / a2)
    sign_Td = math.copysign(1.0, Td)
    log_A = math.log(A / a2)

    for m in range(budget.outer_terms):
        inner = CompensatedSum()
        log_outer = -math.lgamma(m + 1) + m * log_A
        sign_outer = (-1.0) ** m
        for k in range(m + 1):
            if k > 0 and log_w is None:
                break
            log_bin = math.lgamma(m + 1) - math.lgamma(k + 1) - math.lgamma(m - k + 1)
            log_wk = log_bin + (k * log_w if k else 0.0)
            if delta is None:
                e1 = alpha * (m + 1) - beta * k
                mu1 = alpha + m - beta * k + 1
                e2 = e1 - 1.0
                mu2 = mu1 - 1.0
            else:
                e1 = alpha * (m + 1) - delta * k
                mu1 = alpha + beta * m - delta * k + 1
                e2 = alpha * (m + 1) - delta * (k + 1)
                mu2 = alpha + beta * m - delta * (k + 1) + 1
            for log_pref, sgn, e, mu in (
                (log_K, 1.0, e1, mu1),
                (log_Td, sign_Td, e2, mu2),
            ):
                ml = _ml(lam, mu, m, z, budget)
                if ml == 0.0:
                    continue
                piece = (
                    sgn
                    * math.copysign(1.0, ml)
                    * math.exp(log_wk + log_pref + e * logt + math.log(abs(ml)))
                )
                inner.add(piece)
        yield sign_outer * math.exp(log_outer) * inner.value


# ---------------------------------------------------------------------------
# extended precision (gmpy2, 128-bit significand)
# ---------------------------------------------------------------------------

_EXT_PREC = 128


def _ext_context():
    import gmpy2

    return gmpy2, gmpy2.context(precision=_EXT_PREC)


def _ml_ext(g, lam, mu, k, z, max_terms, gamma_cache):
    """Mittag-Leffler derivative in mpfr arithmetic."""
    s = g.mpfr(0)
    fac_ratio = g.mpfr(1)
    for i in range(1, k + 1):
        fac_ratio *= i
    zpow = g.mpfr(1)
    tiny = g.mpfr(2) ** (-_EXT_PREC - 8)
    streak = 0
    for j in range(max_terms):
        arg = lam * j + lam * k + mu
        argf = float(arg)
        if not (argf <= 1e-12 and abs(argf - round(argf)) < 1e-12):
            ga = gamma_cache.get(argf)
            if ga is None:
                ga = g.gamma(arg)
                gamma_cache[argf] = ga
            term = fac_ratio * zpow / ga
            s += term
            if abs(term) < tiny * max(abs(s), g.mpfr(1e-300)):
                streak += 1
                if streak >= 2:
                    break
            else:
                streak = 0
        fac_ratio = fac_ratio * (j + 1 + k) / (j + 1)
        zpow *= z
    return s


def _open_ext(a2, a1, a0, alpha, beta, t, budget):
    g, ctx = _ext_context()
    with ctx:
        t = g.mpfr(t)
        a2, a1, a0 = g.mpfr(a2), g.mpfr(a1), g.mpfr(a0)
        alpha, beta = g.mpfr(alpha), g.mpfr(beta)
        z = -(a1 / a2) * t ** (alpha - beta)
        cache: dict = {}
        s = g.mpfr(0)
        pref = 1 / a2
        streak = 0
        prev = None
        grew = False
        converged = False
        for m in range(budget.outer_terms):
            ml = _ml_ext(g, alpha - beta, alpha + beta * m + 1, m, z, budget.ml_max_terms, cache)
            term = pref * t ** (alpha * (m + 1)) * ml
            s += term
            a = abs(term)
            grew = prev is not None and a > prev
            prev = a
            if a < budget.tol * max(abs(s), g.mpfr(1e-300)):
                streak += 1
                if streak >= 2:
                    converged = True
                    break
            else:
                streak = 0
            pref = pref * (-(a0 / a2)) / (m + 1)
            if pref == 0:
                converged = True
                break
        if not converged and grew:
            raise SeriesDivergence("outer terms still growing at the budget limit")
        return float(s)


def _closed_ext(a2, a1, a0, alpha, beta, K, Td, delta, t, budget):
    g, ctx = _ext_context()
    with ctx:
        t = g.mpfr(t)
        a2, a1, a0 = g.mpfr(a2), g.mpfr(a1), g.mpfr(a0)
        alpha, beta = g.mpfr(alpha), g.mpfr(beta)
        K, Td = g.mpfr(K), g.mpfr(Td)
        A = a0 + K
        if delta is None:
            lam = alpha - 1
            z = -(Td / a2) * t ** (alpha - 1)
            w = a1 / A
        else:
            delta = g.mpfr(delta)
            lam = alpha - beta
            z = -(a1 / a2) * t ** (alpha - beta)
            w = Td / A
        cache: dict = {}
        ml_cache: dict = {}
        s = g.mpfr(0)
        outer = g.mpfr(1)  # (-1)^m (A/a2)^m / m!
        streak = 0
        prev = None
        grew = False
        converged = False
        for m in range(budget.outer_terms):
            inner = g.mpfr(0)
            binom = g.mpfr(1)
            wk = g.mpfr(1)
            for k in range(m + 1):
                if delta is None:
                    e1 = alpha * (m + 1) - beta * k
                    mu1 = alpha + m - beta * k + 1
                    e2 = e1 - 1
                    mu2 = mu1 - 1
                else:
                    e1 = alpha * (m + 1) - delta * k
                    mu1 = alpha + beta * m - delta * k + 1
                    e2 = alpha * (m + 1) - delta * (k + 1)
                    mu2 = alpha + beta * m - delta * (k + 1) + 1
                for pref, e, mu in ((K / a2, e1, mu1), (Td / a2, e2, mu2)):
                    key = (m, float(mu))
                    ml = ml_cache.get(key)
                    if ml is None:
                        ml = _ml_ext(g, lam, mu, m, z, budget.ml_max_terms, cache)
                        ml_cache[key] = ml
                    inner += binom * wk * pref * t**e * ml
                binom = binom * (m - k) / (k + 1)
                wk *= w
                if wk == 0 and k < m:
                    break
            term = outer * inner
            s += term
            a = abs(term)
            grew = prev is not None and a > prev
            prev = a
            if a < budget.tol * max(abs(s), g.mpfr(1e-300)):
                streak += 1
                if streak >= 2:
                    converged = True
                    break
            else:
                streak = 0
            outer = outer * (-(A / a2)) / (m + 1)
        if not converged and grew:
            raise SeriesDivergence("outer terms still growing at the budget limit")
        return float(s)


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------

def step_open(a2, a1, a0, alpha, beta, t, budget: SeriesBudget = SeriesBudget()) -> float:
    """Unit-step response of a2 y^(alpha) + a1 y^(beta) + a0 y = u at time t."""
    if a2 == 0:
        raise ValueError("a2 must be non-zero")
    if not alpha > beta > 0:
        raise ValueError("need alpha > beta > 0")
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return 0.0
    if budget.precision_mode == "double_double":
        return _open_ext(a2, a1, a0, alpha, beta, t, budget)
    return _accumulate(_open_terms(a2, a1, a0, alpha, beta, t, budget), budget)


def step_closed_ipd(a2, a1, a0, alpha, beta, K, Td, t,
                    budget: SeriesBudget = SeriesBudget()) -> float:
    """Unit-step response of the closed loop with regulator K + Td d/dt around
    the fractional plant (requires alpha > 1)."""
    if a2 == 0 or K <= 0 or Td == 0:
        raise ValueError("need a2 != 0, K > 0, Td != 0")
    if not alpha > 1:
        raise ValueError("this series form needs alpha > 1")
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return 0.0
    if budget.precision_mode == "double_double":
        return _closed_ext(a2, a1, a0, alpha, beta, K, Td, None, t, budget)
    return _accumulate(
        _closed_terms(a2, a1, a0, alpha, beta, K, Td, None, t, budget), budget
    )


def step_closed_fpd(a2, a1, a0, alpha, beta, K, Td, delta, t,
                    budget: SeriesBudget = SeriesBudget()) -> float:
    """Unit-step response of the closed loop with regulator K + Td d^delta/dt^delta."""
    if a2 == 0 or K <= 0 or Td == 0:
        raise ValueError("need a2 != 0, K > 0, Td != 0")
    if not 0 < delta < alpha:
        raise ValueError("need 0 < delta < alpha")
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return 0.0
    if budget.precision_mode == "double_double":
        return _closed_ext(a2, a1, a0, alpha, beta, K, Td, delta, t, budget)
    return _accumulate(
        _closed_terms(a2, a1, a0, alpha, beta, K, Td, delta, t, budget), budget
    )
