"""SOFR forward-curve construction, statistical simulation and pricing."""

from .calibration import (
    CalibrationResult,
    CalibrationSystem,
    Quote,
    build_system,
    daily_backfill,
    solve_bidask,
    solve_mid,
)
from .curve import (
    BasisFamily,
    ForwardCurve,
    RatePath,
    arithmetic_average,
    geometric_average,
)
from .dates import (
    Schedule,
    one_month_reference_period,
    prior_business_day,
    third_wednesday,
    three_month_reference_period,
)
from .errors import SofrSimError
from .model import ModelArtifact, load_artifact, save_artifact
from .pricing import (
    DerivativeSpec,
    indifference_price_maturity,
    indifference_price_spot,
    payouts,
    rollover_factors,
)
from .simulation import (
    ScenarioSet,
    SimulationConfig,
    quantile_bands,
    simulate,
    simulate_to_file,
)
from .transforms import ShiftConfig, from_factors, to_factors
from .var import (
    MedianTargets,
    VarModel,
    estimate,
    median_path_drift,
    stationarity_eigenvalues,
    stationary_drift,
)
from .arbitrage import HullVerdict, check_futures_noarb, check_zcb_noarb, hull_membership

__version__ = "0.1.0"
