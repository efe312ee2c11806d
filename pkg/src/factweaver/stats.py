"""Numerical statistics kernel: CDFs, regression and the hypothesis tests
needed by the per-type significance procedures.

Distribution CDFs and the Shapiro-Wilk procedure delegate to scipy (whose
chi-square/Student-t CDFs run through the regularized incomplete gamma/beta
functions); everything layered on top is implemented here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats as sps

from .errors import DegenerateInput, DomainError, InsufficientData

GRUBBS_ALPHA = 0.05


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    r_squared: float


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float

    def __post_init__(self):
        if not (0.0 <= self.p_value <= 1.0) and not math.isnan(self.p_value):
            raise DomainError(f"p-value {self.p_value} outside [0, 1]")


def normal_cdf(x: float, mu: float = 0.0, sigma: float = 1.0) -> float:
    if sigma <= 0:
        raise DomainError("normal distribution requires sigma > 0")
    return float(sps.norm.cdf(x, loc=mu, scale=sigma))


def logistic_cdf(x: float, mu: float = 0.0, scale: float = 1.0) -> float:
    if scale <= 0:
        raise DomainError("logistic distribution requires scale > 0")
    return float(sps.logistic.cdf(x, loc=mu, scale=scale))


def t_cdf(x: float, df: float) -> float:
    if df < 1:
        raise DomainError("Student t requires df >= 1")
    return float(sps.t.cdf(x, df))


def chi2_cdf(x: float, df: float) -> float:
    if df < 1:
        raise DomainError("chi-square requires df >= 1")
    return float(sps.chi2.cdf(x, df))


def cdf(dist: str, x: float, *params: float) -> float:
    """Dispatching CDF: dist is one of normal/logistic/student_t/chi_square."""
    table = {
        "normal": normal_cdf,
        "logistic": logistic_cdf,
        "student_t": t_cdf,
        "chi_square": chi2_cdf,
    }
    if dist not in table:
        raise DomainError(f"unknown distribution {dist!r}")
    return table[dist](x, *params)


def linear_regression(y: Sequence[float]) -> RegressionFit:
    """Least-squares fit of y against indices rescaled to [0, 1].

    Rescaling keeps slopes comparable across series of different lengths.
    A zero-variance y has no trend signal, so its r-squared is defined as 0.
    """
    n = len(y)
    if n < 3:
        raise InsufficientData("linear regression requires at least 3 points")
    ys = np.asarray(y, dtype=float)
    xs = np.linspace(0.0, 1.0, n)
    x_mean, y_mean = xs.mean(), ys.mean()
    sxx = float(np.sum((xs - x_mean) ** 2))
    sxy = float(np.sum((xs - x_mean) * (ys - y_mean)))
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean
    sst = float(np.sum((ys - y_mean) ** 2))
    if sst == 0.0:
        return RegressionFit(slope=0.0, intercept=float(y_mean), r_squared=0.0)
    sse = float(np.sum((ys - (intercept + slope * xs)) ** 2))
    r2 = max(0.0, min(1.0, 1.0 - sse / sst))
    return RegressionFit(slope=slope, intercept=intercept, r_squared=r2)


def pearson_test(x: Sequence[float], y: Sequence[float]) -> tuple[float, TestResult]:
    """Pearson r with a two-tailed p-value from Student t with n-2 dof."""
    if len(x) != len(y):
        raise DomainError("pearson_test requires equal-length samples")
    n = len(x)
    if n < 3:
        raise InsufficientData("pearson_test requires at least 3 pairs")
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if np.allclose(xa, xa[0]) or np.allclose(ya, ya[0]):
        raise DegenerateInput("pearson_test requires nonzero variance in both samples")
    xd = xa - xa.mean()
    yd = ya - ya.mean()
    r = float(np.dot(xd, yd) / math.sqrt(np.dot(xd, xd) * np.dot(yd, yd)))
    r = max(-1.0, min(1.0, r))
    if abs(r) >= 1.0 - 1e-15:
        return (1.0 if r > 0 else -1.0), TestResult(statistic=math.inf, p_value=0.0)
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * (1.0 - t_cdf(abs(t), n - 2))
    return r, TestResult(statistic=t, p_value=min(1.0, max(0.0, p)))


def chi_square_uniform(counts: Sequence[float]) -> TestResult:
    """Chi-square goodness-of-fit against equal counts in every category."""
    k = len(counts)
    if k < 2:
        raise DegenerateInput("chi-square test requires at least 2 categories")
    total = float(sum(counts))
    if total <= 0:
        raise DegenerateInput("chi-square test requires a positive total count")
    expected = total / k
    statistic = float(sum((o - expected) ** 2 / expected for o in counts))
    p = float(sps.chi2.sf(statistic, k - 1))
    return TestResult(statistic=statistic, p_value=min(1.0, max(0.0, p)))


def shapiro_wilk(x: Sequence[float]) -> TestResult:
    """Shapiro-Wilk normality test (Royston's AS R94 approximation via scipy)."""
    n = len(x)
    if n < 3 or n > 5000:
        raise DegenerateInput("Shapiro-Wilk supports 3 <= n <= 5000")
    xa = np.asarray(x, dtype=float)
    if np.allclose(xa, xa[0]):
        raise DegenerateInput("Shapiro-Wilk requires nonzero variance")
    w, p = sps.shapiro(xa)
    return TestResult(statistic=float(w), p_value=float(min(1.0, max(0.0, p))))


def _grubbs_critical(n: int, alpha: float) -> float:
    t_crit = float(sps.t.ppf(1.0 - alpha / (2.0 * n), n - 2))
    return (n - 1) / math.sqrt(n) * math.sqrt(t_crit**2 / (n - 2 + t_crit**2))


def grubbs_test(x: Sequence[float]) -> tuple[Optional[int], TestResult]:
    """Two-sided Grubbs outlier test at alpha=0.05.

    Returns (index of the detected outlier or None, TestResult).  The p-value
    comes from inverting the t-based critical-value mapping, so the reject
    decision and the p-value always agree.
    """
    n = len(x)
    if n < 3:
        raise InsufficientData("Grubbs test requires at least 3 values")
    xa = np.asarray(x, dtype=float)
    sd = float(xa.std(ddof=1))
    if sd == 0.0:
        raise DegenerateInput("Grubbs test requires nonzero variance")
    deviations = np.abs(xa - xa.mean())
    idx = int(np.argmax(deviations))
    g = float(deviations[idx] / sd)

    # Invert G = ((n-1)/sqrt(n)) * sqrt(t^2 / (n-2+t^2)) for t, then map to a
    # two-sided p-value with the Bonferroni factor 2n.
    q = g * g * n / (n - 1) ** 2
    if q >= 1.0:
        p = 0.0
    else:
        t = math.sqrt(q * (n - 2) / (1.0 - q))
        p = min(1.0, 2.0 * n * float(sps.t.sf(t, n - 2)))
    rejected = g > _grubbs_critical(n, GRUBBS_ALPHA)
    return (idx if rejected else None), TestResult(statistic=g, p_value=p)


def power_law_residual_test(sorted_desc: Sequence[float]) -> TestResult:
    """How outstanding the first value is against a power-law tail.

    The tail values (all but the maximum) are regressed on i**-0.7 with i the
    1-based rank; a Gaussian is fitted to the tail residuals and the p-value
    is the upper-tail probability of the maximum's prediction residual under
    that Gaussian.
    """
    n = len(sorted_desc)
    if n < 4:
        raise InsufficientData("power-law residual test requires at least 4 values")
    xs = np.asarray(sorted_desc, dtype=float)
    ranks = np.arange(2, n + 1, dtype=float)
    u = ranks**-0.7
    tail = xs[1:]
    u_mean, tail_mean = u.mean(), tail.mean()
    suu = float(np.sum((u - u_mean) ** 2))
    if suu == 0.0:
        raise DegenerateInput("degenerate rank predictor")
    slope = float(np.sum((u - u_mean) * (tail - tail_mean)) / suu)
    intercept = tail_mean - slope * u_mean
    residuals = tail - (intercept + slope * u)
    mu = float(residuals.mean())
    sigma = float(residuals.std(ddof=0))
    observed = float(xs[0] - (intercept + slope * 1.0))
    # An exact power-law fit leaves only float noise in the residuals; treat
    # it as the degenerate zero-variance Gaussian.
    tol = 1e-9 * max(1.0, float(np.max(np.abs(xs))))
    if sigma <= tol:
        if abs(observed - mu) <= tol:
            p = 0.5
        else:
            p = 0.0 if observed > mu else 1.0
        observed = 0.0 if abs(observed) <= tol else observed
    else:
        p = float(sps.norm.sf(observed, loc=mu, scale=sigma))
    return TestResult(statistic=observed, p_value=min(1.0, max(0.0, p)))
