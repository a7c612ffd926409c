"""Self-contained special functions for p-value computation.

Implementations follow the classic continued-fraction / series forms
(Numerical Recipes style) so the statistics module needs no external
dependency.  Accuracy is well inside 1e-8 over the ranges the tests
exercise; the test suite pins this against an independent oracle.
"""

from __future__ import annotations

import math

_MAX_ITER = 300
_EPS = 3e-16
_FPMIN = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        a * math.log(x)
        + b * math.log1p(-x)
        - (math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_sf2(t: float, df: float) -> float:
    """Two-sided tail probability P(|T| >= t) for Student's t with df dof."""
    if df <= 0:
        raise ValueError(f"df must be positive, got {df}")
    return betainc(df / 2.0, 0.5, df / (df + t * t))


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def kolmogorov_sf(lam: float) -> float:
    """Survival function of the asymptotic Kolmogorov distribution.

    Uses the Jacobi-theta form of the CDF below lam = 1 and the alternating
    exponential series above; both are exact series truncated at machine
    precision.
    """
    if lam <= 0.0:
        return 1.0
    if lam < 1.0:
        total = 0.0
        for k in range(1, 40):
            term = math.exp(-((2 * k - 1) ** 2) * math.pi**2 / (8.0 * lam * lam))
            total += term
            if term < 1e-20 * max(total, 1e-300):
                break
        return 1.0 - math.sqrt(2.0 * math.pi) / lam * total
    total = 0.0
    sign = 1.0
    for k in range(1, 400):
        term = math.exp(-2.0 * k * k * lam * lam)
        total += sign * term
        if term < 1e-20:
            break
        sign = -sign
    return max(0.0, min(1.0, 2.0 * total))
