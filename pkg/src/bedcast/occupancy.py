"""Expected occupancy of the time-varying infinite-server queue.

The expected number of occupied beds on day t is the discrete convolution of
past arrival rates with the conditional survival of stays begun on those
days, truncated at the model horizon:

    rho_t = sum_{u=0}^{s_max} lambda_{t-u} * P(S > u | admitted on t-u)

The sum runs on the integer day grid exactly as the planning formulas expect;
the ~+0.5*lambda discrepancy against the continuous-time integral is a known
property of the day grid and is deliberately not corrected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoverageError, OutOfRange
from .losfit import LosModel, conditional_survival_track


@dataclass
class OccupancySeries:
    """Expected occupancy rho_t with its long-run mean and daily excess.

    ``start_offset`` is the index of the first reported day relative to the
    start of the arrival-rate track (nonzero only without backfill).
    """

    rho: np.ndarray
    rho_bar: float
    start_offset: int = 0

    @property
    def delta(self) -> np.ndarray:
        return self.rho - self.rho_bar

    def __len__(self) -> int:
        return len(self.rho)


def expected_occupancy(
    lambda_t,
    model: LosModel,
    backfill: bool = True,
) -> OccupancySeries:
    """Evaluate the occupancy convolution over the arrival-rate track.

    Lags reaching before the start of the history need arrival and LOS values
    there.  With ``backfill`` (the default) the earliest smoothed values are
    extended backwards, so the full series is reported.  Without it, only
    days with complete lag coverage are reported, i.e. the first ``s_max``
    days are dropped; a series shorter than that cannot be evaluated at all.
    """
    lam = np.asarray(lambda_t, dtype=float)
    if np.any(lam < 0):
        raise ValueError("arrival rates must be >= 0")
    n = len(lam)
    s_max = int(model.s_max)
    if len(model.mu_t) != n or len(model.sigma2_t) != n:
        raise CoverageError(
            f"model tracks (len {len(model.mu_t)}) do not cover the rate series (len {n})"
        )

    if backfill:
        pad = s_max
        lam_ext = np.concatenate([np.full(pad, lam[0]), lam])
        mu_ext = np.concatenate([np.full(pad, model.mu_t[0]), model.mu_t])
        s2_ext = np.concatenate([np.full(pad, model.sigma2_t[0]), model.sigma2_t])
        out_lo = 0
    else:
        if n <= s_max:
            raise CoverageError(
                f"series of length {n} cannot cover a lag window of {s_max} days"
            )
        pad = 0
        lam_ext, mu_ext, s2_ext = lam, model.mu_t, model.sigma2_t
        out_lo = s_max

    n_out = n - out_lo
    rho = np.zeros(n_out)
    # admit-day index of lag u for output day t: (t + pad) - u
    base = out_lo + pad
    for u in range(s_max + 1):
        sl = slice(base - u, base - u + n_out)
        surv = conditional_survival_track(model.family, model.kappa, mu_ext[sl], s2_ext[sl], u)
        rho += lam_ext[sl] * surv

    rho_bar = float(lam.mean() * model.mu_t.mean())
    return OccupancySeries(rho, rho_bar, start_offset=out_lo)


def occupancy_to_load_distribution(series: OccupancySeries, day: int) -> float:
    """Poisson mean of the day-level bed load.

    Under the infinite-server model the number of occupied beds on a day is
    Poisson distributed with mean rho_t; this accessor feeds the overflow
    calculations.
    """
    if day < 0 or day >= len(series.rho):
        raise OutOfRange(f"day {day} outside series of length {len(series.rho)}")
    return float(series.rho[day])
