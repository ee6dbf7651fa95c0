"""Student-t statistics for the evaluation protocol.

The t CDF is computed from the regularized incomplete beta function with a
modified Lentz continued fraction, accurate to ~1e-13; quantiles come from
bisection on the CDF.  On top of that sit the one-sided two-sample test
(Welch by default, pooled as a sensitivity mode), a one-sample two-sided
test, and confidence half-widths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

_CF_MAX_ITER = 500
_CF_EPS = 1e-15
_TINY = 1e-300


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    degrees_of_freedom: float
    p_value_one_sided: float


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Modified Lentz evaluation of the incomplete beta continued fraction."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise RuntimeError(f"incomplete beta continued fraction failed for a={a} b={b} x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # the continued fraction converges fast only below the distribution bulk
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def student_t_cdf(t: float, df: float) -> float:
    """P(T <= t) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError(f"degrees of freedom must be positive, got {df}")
    t = float(t)
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    if t == 0.0:
        return 0.5
    x = df / (df + t * t)
    tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x)
    return 1.0 - tail if t > 0 else tail


@lru_cache(maxsize=4096)
def t_quantile(prob: float, df: float) -> float:
    """Inverse CDF by bisection (absolute CDF tolerance 1e-12)."""
    if not 0.0 < prob < 1.0:
        raise ValueError("prob must be strictly between 0 and 1")
    if prob == 0.5:
        return 0.0
    if prob < 0.5:
        return -t_quantile(1.0 - prob, df)
    lo, hi = 0.0, 2.0
    while student_t_cdf(hi, df) < prob:
        hi *= 2.0
        if hi > 1e18:
            raise RuntimeError("t_quantile bracket expansion failed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if student_t_cdf(mid, df) < prob:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def _moments(sample):
    arr = np.asarray(sample, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("each sample must be 1-D with at least 2 values")
    if not np.isfinite(arr).all():
        raise ValueError("sample values must be finite")
    return arr.size, float(arr.mean()), float(arr.var(ddof=1))


def welch_one_sided(sample_a, sample_b, pooled: bool = False) -> TTestResult:
    """One-sided two-sample test of H1: mean(b) > mean(a).

    Welch (unequal variances) by default; ``pooled=True`` switches to the
    classic equal-variance statistic for sensitivity checks.
    """
    na, ma, va = _moments(sample_a)
    nb, mb, vb = _moments(sample_b)
    if va == 0.0 and vb == 0.0:
        # degenerate: both samples are constants
        df = float(na + nb - 2)
        if ma == mb:
            return TTestResult(0.0, df, 0.5)
        t = math.inf if mb > ma else -math.inf
        return TTestResult(t, df, 0.0 if mb > ma else 1.0)
    if pooled:
        sp2 = ((na - 1) * va + (nb - 1) * vb) / (na + nb - 2)
        se = math.sqrt(sp2 * (1.0 / na + 1.0 / nb))
        df = float(na + nb - 2)
    else:
        se = math.sqrt(va / na + vb / nb)
        df = (va / na + vb / nb) ** 2 / (
            (va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1)
        )
    t = (mb - ma) / se
    return TTestResult(t, df, 1.0 - student_t_cdf(t, df))


def one_sample_two_sided(sample, mu0: float) -> TTestResult:
    """Two-sided one-sample test of H0: mean == mu0 (p stored in the
    one-sided slot for uniformity; it is the two-sided p-value)."""
    n, m, v = _moments(sample)
    df = float(n - 1)
    if v == 0.0:
        if m == mu0:
            return TTestResult(0.0, df, 1.0)
        t = math.inf if m > mu0 else -math.inf
        return TTestResult(t, df, 0.0)
    t = (m - mu0) / math.sqrt(v / n)
    p = 2.0 * (1.0 - student_t_cdf(abs(t), df))
    return TTestResult(t, df, p)


def mean_ci(sample, level: float = 0.95) -> tuple:
    """(mean, half_width) of the t confidence interval at ``level``."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must be strictly between 0 and 1")
    n, m, v = _moments(sample)
    q = t_quantile((1.0 + level) / 2.0, float(n - 1))
    return m, q * math.sqrt(v / n)
