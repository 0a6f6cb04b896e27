"""Bed-occupancy estimation and capacity planning for intensive care units.

The model treats each unit as an infinite-server queue with a time-varying
Poisson arrival rate and a time-varying length-of-stay distribution: expected
occupancy is the convolution of smoothed arrival rates with conditional
survival probabilities, and bed requirements follow from average-, peak-, and
overflow-probability-based rules on that series.
"""

from .decomp import Decomposition, StlConfig, VarianceTrack, grid_search, loess_smooth, rolling_variance, stl_decompose
from .ingest import AdmissionRecord, DailySiteSeries, build_daily_series, fill_gaps, parse_admissions, reconstruct_census
from .losfit import (
    FitResult,
    LosFamily,
    LosModel,
    SurvivalCurve,
    conditional_survival,
    km_survival,
    mle_fit,
    select_distribution,
    shape_stability,
)
from .occupancy import OccupancySeries, expected_occupancy, occupancy_to_load_distribution
from .planning import CapacityPlan, UtilizationStats, b_average, b_max, b_overflow, poisson_tail, utilization_stats, weighted_aggregate
from .projection import ProjectionConfig, SiteHistory, YearHistory, project, project_admissions, project_run, resample_profile, site_shares, summarize_runs
from .scenario import ScenarioSpec, apply_scenario, variance_sensitivity
from .simulate import SimConfig, empirical_overflow, make_sampler, run_replications, sample_nhpp, simulate_census

__version__ = "0.1.0"
