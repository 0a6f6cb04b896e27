"""Capacity strategies and utilization statistics.

Three bed-count rules are supported: a square-root buffer on the long-run
average load, the same buffer on the peak of the expected-occupancy series,
and the smallest capacity keeping the Poisson overflow probability below a
target risk.  Utilization metrics quantify what each choice would have meant
day to day.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, EmptyInput, EmptySeries, SearchExhausted
from .occupancy import OccupancySeries

SEARCH_CAP_FACTOR = 100


@dataclass(frozen=True)
class OverflowTarget:
    gamma: float
    alpha: float

    def __post_init__(self):
        if not (0.0 < self.gamma <= 1.0):
            raise DomainError(f"gamma must be in (0, 1], got {self.gamma}")
        if not (0.0 < self.alpha < 1.0):
            raise DomainError(f"alpha must be in (0, 1), got {self.alpha}")


@dataclass
class CapacityPlan:
    b_average: int
    b_max: int
    b_overflow: dict[OverflowTarget, int]


@dataclass
class UtilizationStats:
    """Daily utilization (%) summary under a fixed capacity.

    Conditional overload/shortfall statistics are None when no day qualifies.
    Overload days run above 100%; underutilization days run below 70%, with
    the shortfall measured from the 70% mark.
    """

    mean_pct: float
    sd_pct: float
    pct_days_over_100: float
    excess_mean_pct: float | None
    excess_sd_pct: float | None
    pct_days_under_70: float
    shortfall_mean_pct: float | None
    shortfall_sd_pct: float | None


def b_average(lambda_bar: float, mean_los: float) -> int:
    """Mean load plus a square-root buffer, from raw full-history averages.

    No smoothing is involved: lambda_bar and mean_los come straight from the
    observed admissions and stays.
    """
    if lambda_bar <= 0 or mean_los <= 0:
        raise DomainError("lambda_bar and mean_los must be positive")
    rho_bar = lambda_bar * mean_los
    return int(math.ceil(rho_bar + math.sqrt(rho_bar)))


def b_max(rho: OccupancySeries | np.ndarray) -> int:
    """Peak expected occupancy plus a square-root buffer."""
    values = rho.rho if isinstance(rho, OccupancySeries) else np.asarray(rho, dtype=float)
    if len(values) == 0:
        raise EmptySeries("empty occupancy series")
    peak = float(values.max())
    return int(math.ceil(peak + math.sqrt(peak)))


def poisson_tail(k: int, mean: float) -> float:
    """P(X > k) for X ~ Poisson(mean), exact via the regularized incomplete gamma."""
    if mean < 0:
        raise DomainError(f"mean must be >= 0, got {mean}")
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    return float(special.gammainc(k + 1, mean))


def _tail_over_days(k: int, rho: np.ndarray) -> np.ndarray:
    return special.gammainc(k + 1, rho)


def b_overflow(
    rho: OccupancySeries | np.ndarray,
    gamma: float,
    alpha: float,
    per_day: bool = False,
) -> int:
    """Smallest capacity B with overflow probability beyond gamma*B at most alpha.

    The day-level load is Poisson with mean rho_t; the constraint is on the
    day-averaged overflow probability (or on every single day when
    ``per_day`` is set, for stress analysis).  The capacity threshold enters
    the Poisson CDF at floor(gamma * B).
    """
    target = OverflowTarget(gamma, alpha)
    values = rho.rho if isinstance(rho, OccupancySeries) else np.asarray(rho, dtype=float)
    if len(values) == 0:
        raise EmptySeries("empty occupancy series")
    cap = SEARCH_CAP_FACTOR * (1 + int(math.ceil(values.max())))
    for beds in range(1, cap + 1):
        tails = _tail_over_days(math.floor(target.gamma * beds), values)
        risk = float(tails.max()) if per_day else float(tails.mean())
        if risk <= target.alpha:
            return beds
    raise SearchExhausted(f"no capacity up to {cap} meets gamma={gamma}, alpha={alpha}")


def peak_product_heuristic(admit_count, mean_los) -> int:
    """Peak of (daily admissions x daily mean LOS); comparison only.

    A naive rule known to inflate requirements badly; kept so its estimates
    can be reported next to the proper strategies, never used for planning.
    """
    counts = np.asarray(admit_count, dtype=float)
    los = np.asarray(mean_los, dtype=float)
    product = np.where(counts > 0, counts * np.nan_to_num(los), 0.0)
    if len(product) == 0:
        raise EmptySeries("empty series")
    return int(math.ceil(float(product.max())))


def utilization_stats(census, capacity: int) -> UtilizationStats:
    """Daily utilization percentages for a census series under a capacity."""
    if capacity < 1:
        raise DomainError(f"capacity must be >= 1, got {capacity}")
    u = 100.0 * np.asarray(census, dtype=float) / capacity
    over = u[u > 100.0] - 100.0
    under = 70.0 - u[u < 70.0]
    n = len(u)
    return UtilizationStats(
        mean_pct=float(u.mean()),
        sd_pct=float(u.std()),
        pct_days_over_100=100.0 * len(over) / n,
        excess_mean_pct=float(over.mean()) if len(over) else None,
        excess_sd_pct=float(over.std()) if len(over) else None,
        pct_days_under_70=100.0 * len(under) / n,
        shortfall_mean_pct=float(under.mean()) if len(under) else None,
        shortfall_sd_pct=float(under.std()) if len(under) else None,
    )


def weighted_aggregate(site_stats) -> tuple[float, float]:
    """Admission-weighted mean and SD of per-site utilization means.

    ``site_stats`` is a sequence of (mean, weight) pairs; weights are the
    sites' admission volumes so large centers dominate the system metric.
    """
    pairs = list(site_stats)
    if not pairs:
        raise EmptyInput("no site statistics")
    values = np.array([v for v, _ in pairs], dtype=float)
    weights = np.array([w for _, w in pairs], dtype=float)
    if np.any(weights <= 0):
        raise DomainError("weights must be positive")
    mean = float((weights * values).sum() / weights.sum())
    sd = float(math.sqrt((weights * (values - mean) ** 2).sum() / weights.sum()))
    return mean, sd
