"""Statistical diagnostics behind the nonhomogeneous-Poisson arrival model.

Three checks: exponentiality of interarrival times (rejected when the rate
varies), the variance-to-mean dispersion of daily counts (close to one under
Poisson marginals), and a chi-squared goodness of fit of the daily-count
distribution (rejected under seasonality).  All are advisory; the pipeline
reports them and proceeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .errors import DomainError, TooFewBins, TooFewSamples, ZeroMean

MIN_KS_SAMPLES = 10
MIN_EXPECTED_PER_BIN = 5.0


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    n: int


def ks_exponential(interarrival_times) -> TestResult:
    """Kolmogorov-Smirnov distance to the exponential at the sample mean.

    The p-value uses the asymptotic Kolmogorov distribution; with the rate
    estimated from the same data it errs on the conservative side, which is
    fine for an advisory check.
    """
    x = np.sort(np.asarray(interarrival_times, dtype=float))
    n = len(x)
    if n < MIN_KS_SAMPLES:
        raise TooFewSamples(f"need at least {MIN_KS_SAMPLES} interarrival times, got {n}")
    if np.any(x <= 0):
        raise DomainError("interarrival times must be positive")
    cdf = 1.0 - np.exp(-x / x.mean())
    i = np.arange(1, n + 1)
    d = float(np.maximum(i / n - cdf, cdf - (i - 1) / n).max())
    p = float(special.kolmogorov(math.sqrt(n) * d))
    return TestResult(d, p, n)


def dispersion_index(daily_counts) -> TestResult:
    """Variance-to-mean ratio of daily counts with a chi-squared reference.

    The statistic (n - 1) * ratio is compared against chi-squared with n - 1
    degrees of freedom; values near 1 are consistent with Poisson marginals.
    """
    x = np.asarray(daily_counts, dtype=float)
    n = len(x)
    mean = x.mean()
    if mean <= 0:
        raise ZeroMean("daily counts have zero mean")
    ratio = float(x.var() / mean)
    p = float(stats.chi2.sf((n - 1) * ratio, n - 1))
    return TestResult(ratio, p, n)


def chi2_poisson_gof(daily_counts, min_expected: float = MIN_EXPECTED_PER_BIN) -> TestResult:
    """Pearson goodness of fit of daily counts against Poisson(sample mean).

    Count values are binned with expected frequency at least ``min_expected``
    (adjacent bins merged otherwise, the upper tail folded into the last
    bin); degrees of freedom are bins - 2 for the estimated mean.
    """
    x = np.asarray(daily_counts, dtype=int)
    n = len(x)
    mean = x.mean()
    if mean <= 0:
        raise ZeroMean("daily counts have zero mean")
    kmax = int(x.max())
    probs = stats.poisson.pmf(np.arange(kmax + 1), mean)
    probs = np.append(probs, max(0.0, 1.0 - probs.sum()))
    observed = np.append(np.bincount(x, minlength=kmax + 1), 0)

    merged_obs, merged_exp = [], []
    acc_o, acc_e = 0.0, 0.0
    for o, e in zip(observed, probs * n):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            merged_obs.append(acc_o)
            merged_exp.append(acc_e)
            acc_o, acc_e = 0.0, 0.0
    if acc_e > 0 and merged_exp:
        merged_obs[-1] += acc_o
        merged_exp[-1] += acc_e
    if len(merged_exp) < 3:
        raise TooFewBins(f"only {len(merged_exp)} usable bins after merging")

    obs = np.asarray(merged_obs)
    exp = np.asarray(merged_exp)
    stat = float(((obs - exp) ** 2 / exp).sum())
    dof = len(exp) - 2
    return TestResult(stat, float(stats.chi2.sf(stat, dof)), n)


def interarrival_times(admission_days) -> np.ndarray:
    """Event-level interarrival gaps in days from daily admission counts.

    Admissions sharing a day are spread evenly across it so gaps stay
    positive, preserving the daily totals.
    """
    counts = np.asarray(admission_days, dtype=int)
    times = []
    for day, k in enumerate(counts):
        for j in range(k):
            times.append(day + (j + 1) / (k + 1))
    t = np.asarray(times)
    return np.diff(t)
