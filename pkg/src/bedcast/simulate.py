"""Synthetic data generation and a brute-force oracle for the queueing model.

Arrivals are sampled day by day as Poisson counts and each admitted patient
draws a stay from the configured sampler, occupying a bed for every calendar
day the stay touches.  Averaging many independent replications gives an
unbiased estimate of the expected-occupancy series, which is the main
validation target for the analytic convolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import TooFewReplications
from .losfit import LosFamily

# Draws one stay per entry of `days` (the admission day of each patient),
# letting day-dependent parameterizations index their tracks.
LosSampler = Callable[[np.ndarray, np.random.Generator], np.ndarray]


@dataclass
class SimConfig:
    lambda_fn: Callable[[int], float]
    los_sampler: LosSampler
    horizon: int
    replications: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")


def _per_patient(value, days: np.ndarray) -> np.ndarray:
    if np.ndim(value) == 0:
        return np.full(len(days), float(value))
    return np.asarray(value, dtype=float)[days]


def make_sampler(
    family: LosFamily | str,
    *,
    mu=None,
    sigma2=None,
    kappa: float | None = None,
    value: float | None = None,
) -> LosSampler:
    """Stay sampler matching the survival parameterization of the model.

    ``mu``/``sigma2`` may be scalars or per-day arrays indexed by admission
    day; ``family='deterministic'`` always returns ``value``.  The Fisk
    sampler inverts the tail form used by the occupancy model.
    """
    if family == "deterministic":
        if value is None:
            raise ValueError("deterministic sampler needs value=")
        return lambda days, rng: np.full(len(days), float(value))

    family = LosFamily(family)

    def sample(days: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        m = _per_patient(mu, days)
        if family is LosFamily.EXPONENTIAL:
            return rng.exponential(m)
        if family is LosFamily.WEIBULL:
            theta = m / math.gamma(1.0 + 1.0 / kappa)
            return theta * rng.weibull(kappa, len(days))
        if family is LosFamily.GAMMA:
            return rng.gamma(kappa, m / kappa)
        if family is LosFamily.LOGNORMAL:
            s2 = _per_patient(sigma2, days)
            tau2 = np.log1p(s2 / m**2)
            draws = rng.lognormal(np.log(m) - tau2 / 2.0, np.sqrt(tau2))
            return np.where(s2 == 0, m, draws)
        # fisk, inverse of the (theta/(s+theta))^kappa tail
        theta = m * kappa / math.pi
        v = rng.uniform(size=len(days))
        return theta * (v ** (-1.0 / kappa) - 1.0)

    return sample


def sample_nhpp(lambda_fn, horizon: int, rng: np.random.Generator) -> np.ndarray:
    """Daily admission counts of a nonhomogeneous Poisson process.

    Day-level sampling: the count on day t is Poisson with mean lambda(t),
    matching the day-grid resolution of the occupancy model.
    """
    rates = np.array([float(lambda_fn(t)) for t in range(horizon)])
    if np.any(rates < 0):
        raise ValueError("arrival rates must be >= 0")
    return rng.poisson(rates)


def simulate_census(admissions, los_sampler: LosSampler, rng: np.random.Generator) -> np.ndarray:
    """Daily census from admission counts and per-patient stay draws.

    A stay of s days starting on day d occupies days d .. d + ceil(s) - 1.
    Days beyond the admissions horizon are dropped.
    """
    counts = np.asarray(admissions, dtype=int)
    horizon = len(counts)
    days = np.repeat(np.arange(horizon), counts)
    if len(days) == 0:
        return np.zeros(horizon, dtype=int)
    stays = np.ceil(los_sampler(days, rng)).astype(int)
    keep = stays > 0
    starts = days[keep]
    ends = np.minimum(starts + stays[keep], horizon)
    flow = np.bincount(starts, minlength=horizon + 1) - np.bincount(ends, minlength=horizon + 1)
    return np.cumsum(flow[:horizon])


@dataclass
class ReplicationSet:
    """Census paths from independent replications, one row per replication."""

    paths: np.ndarray
    config: SimConfig = field(repr=False, default=None)  # type: ignore[assignment]

    def mean_census(self) -> np.ndarray:
        return self.paths.mean(axis=0)


def run_replications(config: SimConfig) -> ReplicationSet:
    """Simulate independent census paths with per-replication substreams.

    Each replication derives its generator from (seed, replication index),
    so results do not depend on execution order.
    """
    rates = np.array([float(config.lambda_fn(t)) for t in range(config.horizon)])
    if np.any(rates < 0):
        raise ValueError("arrival rates must be >= 0")
    paths = np.empty((config.replications, config.horizon), dtype=int)
    for r in range(config.replications):
        rng = np.random.default_rng(np.random.SeedSequence((config.seed, r)))
        counts = rng.poisson(rates)
        paths[r] = simulate_census(counts, config.los_sampler, rng)
    return ReplicationSet(paths, config)


def empirical_overflow(paths, capacity: float) -> tuple[float, float]:
    """Fraction of (replication, day) cells with census above capacity.

    Returns the frequency and its binomial standard error over the cell
    count.  Cells within one replication are serially correlated, so pass a
    single stationary day per path when an honest standard error matters.
    """
    arr = np.asarray(paths)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.shape[0] < 100:
        raise TooFewReplications(f"need >= 100 replications, got {arr.shape[0]}")
    p = float((arr > capacity).mean())
    se = math.sqrt(p * (1.0 - p) / arr.size)
    return p, se


def dispersion_of_counts(counts) -> float:
    """Variance-to-mean ratio across all sampled daily counts."""
    arr = np.asarray(counts, dtype=float)
    return float(arr.var() / arr.mean())
