"""Marked Hawkes tick-dynamics modeling and volatility estimation."""

from hawkesvol._kernels import BACKEND_NAME
from hawkesvol.core import (
    Convention,
    Direction,
    EventStream,
    FullParams,
    IntensityPath,
    IntensityState,
    MarkedEvent,
    StationarityResult,
    SymmetricParams,
    excitation_jump,
    expected_intensity,
    impact,
    intensities_at_events,
    intensity_at,
    stationarity_check,
)

from hawkesvol.estimate import (
    FitResult,
    compensator_integral,
    conditional_profile,
    fit_full,
    fit_symmetric,
    log_likelihood_ground,
)
from hawkesvol.simulate import (
    ConditionalGeometric,
    ConstantOne,
    EmpiricalMarks,
    Scenario,
    Segment,
    SimulationResult,
    sample_mark,
    simulate_full,
    simulate_path,
    simulate_scenario,
)
from hawkesvol.volatility import (
    KStatistics,
    VolatilityReport,
    estimate_k_statistics,
    hawkes_volatility,
    intraday_cumulative,
    pool_k_statistics,
    tsrv,
    tsrv_from_stream,
    variance_approx,
    variance_iid,
    variance_theorem,
)

__version__ = "0.1.0"

__all__ = [
    "ConditionalGeometric",
    "ConstantOne",
    "EmpiricalMarks",
    "FitResult",
    "KStatistics",
    "Scenario",
    "Segment",
    "SimulationResult",
    "VolatilityReport",
    "compensator_integral",
    "conditional_profile",
    "estimate_k_statistics",
    "fit_full",
    "fit_symmetric",
    "hawkes_volatility",
    "intraday_cumulative",
    "log_likelihood_ground",
    "pool_k_statistics",
    "sample_mark",
    "simulate_full",
    "simulate_path",
    "simulate_scenario",
    "tsrv",
    "tsrv_from_stream",
    "variance_approx",
    "variance_iid",
    "variance_theorem",
    "BACKEND_NAME",
    "Convention",
    "Direction",
    "EventStream",
    "FullParams",
    "IntensityPath",
    "IntensityState",
    "MarkedEvent",
    "StationarityResult",
    "SymmetricParams",
    "excitation_jump",
    "expected_intensity",
    "impact",
    "intensities_at_events",
    "intensity_at",
    "stationarity_check",
    "__version__",
]
