"""Loess smoothing, seasonal-trend decomposition, and residual variance tracks.

Local regression is implemented directly (batched weighted least squares on
the uniform day grid) because the decomposition grid needs locally quadratic
fits, which off-the-shelf decomposition routines do not expose.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import SeriesTooShort, WindowTooLarge

SEASONAL_PERIOD = 7  # weekly seasonality
TREND_CLAMP = 1e-6

SEASONAL_WINDOWS = (7, 15, 31)
TREND_WINDOWS = (15, 31, 61)
DEGREES = (1, 2)
ROBUST_FLAGS = (False, True)


@dataclass(frozen=True)
class StlConfig:
    seasonal_window: int
    trend_window: int
    seasonal_degree: int
    trend_degree: int
    robust: bool

    def __post_init__(self):
        for name in ("seasonal_window", "trend_window"):
            w = getattr(self, name)
            if w < 3 or w % 2 == 0:
                raise ValueError(f"{name} must be odd and >= 3, got {w}")
        for name in ("seasonal_degree", "trend_degree"):
            if getattr(self, name) not in (1, 2):
                raise ValueError(f"{name} must be 1 or 2")


GRID = tuple(
    StlConfig(s, t, sd, td, rob)
    for s, t, sd, td, rob in product(
        SEASONAL_WINDOWS, TREND_WINDOWS, DEGREES, DEGREES, ROBUST_FLAGS
    )
)


@dataclass
class Decomposition:
    trend: np.ndarray
    seasonal: np.ndarray
    residual: np.ndarray
    config: StlConfig
    residual_std: float

    def reconstruct(self) -> np.ndarray:
        return self.trend + self.seasonal + self.residual


@dataclass
class VarianceTrack:
    window: int
    sigma2: np.ndarray


class _LoessPlan:
    """Precomputed geometry for one (series length, window, degree, eval grid).

    The window membership, tricube weights, and polynomial basis depend only
    on the grid, so they are shared across calls; without robustness weights
    the whole fit collapses to one cached coefficient matrix.
    """

    __slots__ = ("cols", "tri", "basis", "degree", "coef")

    def __init__(self, n: int, window: int, degree: int, eval_pos: np.ndarray):
        w = min(window, n)
        degree = min(degree, w - 1)
        half = (w - 1) // 2
        starts = np.clip(np.floor(eval_pos + 0.5).astype(int) - half, 0, n - w)
        cols = starts[:, None] + np.arange(w)[None, :]
        dist = np.abs(cols - eval_pos[:, None])
        dmax = dist.max(axis=1)
        if window > n:
            dmax = dmax * (window / n)
        dmax = np.where(dmax <= 0, 1.0, dmax)
        tri = np.clip(1.0 - (dist / dmax[:, None]) ** 3, 0.0, None) ** 3
        t = cols - eval_pos[:, None]
        basis = t[:, :, None] ** np.arange(degree + 1)[None, None, :]

        self.cols = cols
        self.tri = tri
        self.basis = basis
        self.degree = degree
        # fitted_i = sum_j coef_ij * y[cols_ij] in the unweighted-by-rho case;
        # rank-deficient rows (too few distinct points with weight) smooth to
        # the local weighted mean instead.
        self.coef = np.empty_like(tri)
        ok = (tri > 0).sum(axis=1) > degree
        if ok.any():
            lhs = np.einsum("mwp,mw,mwq->mpq", basis[ok], tri[ok], basis[ok])
            rhs = np.swapaxes(basis[ok], 1, 2) * tri[ok][:, None, :]
            self.coef[ok] = np.linalg.solve(lhs, rhs)[:, 0, :]
        if (~ok).any():
            t = tri[~ok]
            self.coef[~ok] = t / t.sum(axis=1, keepdims=True)


_PLAN_CACHE: dict[tuple, _LoessPlan] = {}


def _plan(n: int, window: int, degree: int, lo: int, hi: int) -> _LoessPlan:
    """Plan for evaluation at integer positions lo .. hi-1 of an n-point grid."""
    key = (n, window, degree, lo, hi)
    plan = _PLAN_CACHE.get(key)
    if plan is None:
        if len(_PLAN_CACHE) > 256:
            _PLAN_CACHE.clear()
        plan = _LoessPlan(n, window, degree, np.arange(lo, hi, dtype=float))
        _PLAN_CACHE[key] = plan
    return plan


def _loess_eval(y, window, degree, lo, hi, rho=None):
    """Locally weighted polynomial fit of ``y`` (grid 0..n-1) at lo .. hi-1.

    Uses the nearest ``window`` points with tricube distance weights; when
    ``window`` exceeds the series length all points are used and the weight
    bandwidth is inflated by window/n.  ``rho`` optionally multiplies in
    per-point robustness weights.  Rows whose weighted design is rank
    deficient fall back to the local weighted mean.
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    if n == 1:
        return np.full(hi - lo, y[0])
    plan = _plan(n, window, degree, lo, hi)
    yw = y[plan.cols]
    if rho is None:
        return np.einsum("mw,mw->m", plan.coef, yw)

    wts = plan.tri * np.asarray(rho, dtype=float)[plan.cols]
    lhs = np.einsum("mwp,mw,mwq->mpq", plan.basis, wts, plan.basis)
    rhs = np.einsum("mwp,mw,mw->mp", plan.basis, wts, yw)

    fitted = np.empty(hi - lo)
    nnz = (wts > 0).sum(axis=1)
    ok = nnz > plan.degree
    if ok.any():
        fitted[ok] = np.linalg.solve(lhs[ok], rhs[ok][:, :, None])[:, 0, 0]
    if (~ok).any():
        wsum = wts[~ok].sum(axis=1)
        safe = wsum > 0
        fitted[~ok] = np.where(
            safe,
            (wts[~ok] * yw[~ok]).sum(axis=1) / np.where(safe, wsum, 1.0),
            yw[~ok].mean(axis=1),
        )
    return fitted


def loess_smooth(series, window: int, degree: int, weights=None) -> np.ndarray:
    """Smooth a complete daily series by local polynomial regression.

    ``weights`` are optional per-point robustness multipliers (e.g. from a
    previous robustness pass).
    """
    y = np.asarray(series, dtype=float)
    if degree not in (1, 2):
        raise ValueError(f"degree must be 1 or 2, got {degree}")
    if window < 3:
        raise ValueError(f"window must be >= 3, got {window}")
    if window > len(y):
        raise WindowTooLarge(f"window {window} exceeds series length {len(y)}")
    return _loess_eval(y, window, degree, 0, len(y), rho=weights)


def _moving_average(x, k):
    return np.convolve(x, np.full(k, 1.0 / k), mode="valid")


def _bisquare(residual):
    r = np.abs(residual)
    h = 6.0 * np.median(r)
    if h <= 0:
        return np.ones(len(r))
    u = np.clip(r / h, 0.0, 1.0)
    return (1.0 - u**2) ** 2


def stl_decompose(
    series,
    config: StlConfig,
    period: int = SEASONAL_PERIOD,
    n_inner: int | None = None,
    n_outer: int | None = None,
) -> Decomposition:
    """Additive seasonal-trend decomposition with loess smoothers.

    The inner loop alternates cycle-subseries smoothing (with one period of
    extension at each end), a moving-average low-pass filter, and trend
    smoothing.  With ``config.robust`` the outer loop recomputes bisquare
    robustness weights from the residuals between passes.
    """
    y = np.asarray(series, dtype=float)
    n = len(y)
    if n < 2 * period:
        raise SeriesTooShort(f"need at least {2 * period} points, got {n}")
    if n_inner is None:
        n_inner = 1 if config.robust else 2
    if n_outer is None:
        n_outer = 10 if config.robust else 1
    low_pass = period if period % 2 == 1 else period + 1

    rho = None
    trend = np.zeros(n)
    seasonal = np.zeros(n)
    for outer in range(n_outer):
        for _ in range(n_inner):
            detrended = y - trend
            cycle = np.empty(n + 2 * period)
            for k in range(period):
                sub = detrended[k::period]
                cycle[k::period] = _loess_eval(
                    sub, config.seasonal_window, config.seasonal_degree,
                    -1, len(sub) + 1,
                    rho=None if rho is None else rho[k::period],
                )
            low = _moving_average(_moving_average(_moving_average(cycle, period), period), 3)
            low = _loess_eval(low, low_pass, 1, 0, n)
            seasonal = cycle[period:period + n] - low
            trend = _loess_eval(
                y - seasonal, config.trend_window, config.trend_degree,
                0, n, rho=rho,
            )
        if config.robust and outer < n_outer - 1:
            rho = _bisquare(y - trend - seasonal)
    residual = y - trend - seasonal
    return Decomposition(trend, seasonal, residual, config, float(residual.std()))


def grid_search(series, period: int = SEASONAL_PERIOD) -> tuple[StlConfig, Decomposition]:
    """Pick the decomposition configuration with the lowest residual std.

    Evaluates the full 72-configuration grid (3 seasonal windows x 3 trend
    windows x 2 seasonal degrees x 2 trend degrees x robust flag).  Ties go
    to smaller windows, then lower degrees, then the non-robust fit, which is
    the enumeration order of the grid.
    """
    y = np.asarray(series, dtype=float)
    if np.isnan(y).any():
        raise ValueError("series has gaps; fill them before decomposition")
    best: tuple[StlConfig, Decomposition] | None = None
    for cfg in GRID:
        dec = stl_decompose(y, cfg, period)
        if best is None or dec.residual_std < best[1].residual_std:
            best = (cfg, dec)
    assert best is not None
    return best


def _rolling_std(x, window):
    """Centered rolling sample std; edge windows are truncated, not padded."""
    n = len(x)
    half = window // 2
    csum = np.concatenate([[0.0], np.cumsum(x)])
    csum2 = np.concatenate([[0.0], np.cumsum(x * x)])
    lo = np.maximum(np.arange(n) - half, 0)
    hi = np.minimum(np.arange(n) + half + 1, n)
    m = (hi - lo).astype(float)
    s1 = csum[hi] - csum[lo]
    s2 = csum2[hi] - csum2[lo]
    var = np.clip((s2 - s1 * s1 / m) / (m - 1.0), 0.0, None)
    return np.sqrt(var)


def rolling_variance(
    residuals,
    windows: tuple[int, ...] = (7, 15, 31),
    floor: float = 1e-6,
) -> VarianceTrack:
    """Time-varying residual variance from the most stable rolling window.

    Each candidate window yields a centered rolling-std series; the window
    whose rolling-std series itself has the smallest standard deviation wins
    (ties to the first candidate).  The chosen series is squared and floored
    at ``floor`` so downstream parameterizations stay positive.
    """
    r = np.asarray(residuals, dtype=float)
    if len(r) < max(windows):
        raise SeriesTooShort(f"need at least {max(windows)} residuals, got {len(r)}")
    best: tuple[float, int, np.ndarray] | None = None
    for w in windows:
        sd = _rolling_std(r, w)
        stability = float(sd.std())
        if best is None or stability < best[0]:
            best = (stability, w, sd)
    assert best is not None
    return VarianceTrack(best[1], np.maximum(best[2] ** 2, floor))


def positive_trend(values, clamp: float = TREND_CLAMP) -> np.ndarray:
    """Clamp a smoothed trend at a small positive floor.

    Arrival rates and mean stays must stay positive even where the smoother
    dips below zero.
    """
    return np.maximum(np.asarray(values, dtype=float), clamp)
