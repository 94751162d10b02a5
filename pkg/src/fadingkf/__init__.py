"""Kalman-filter state estimation over lossy wireless links.

A gateway-side predictive controller jointly selects sensor transmit
powers, bit-rates and coding schemes (single-description, zero-error,
multiple-description, XOR network coding via relays) to trade estimation
accuracy against energy, with a verifiable exponential bound on the
expected error covariance.
"""

from .errors import ConfigurationError, EstimationError, NumericalError, SearchSpaceError
from .plant import PlantModel, PlantState, SensorSpec, measure, stationary_covariance, step_plant
from .channel import (
    ArLinkModel,
    BerModel,
    FsmcModel,
    GainBelief,
    LinkState,
    ar_step,
    ber,
    build_fsmc_from_trace,
    fsmc_belief,
    packet_success,
    predict_gain,
)
from .codec import (
    MdcProfile,
    QuantizerSpec,
    SchemeSpec,
    expected_scheme_distortion,
    mdc_profile,
    quantize,
    sdc_distortion,
    step_size_for_rate,
    zec_rates,
)
from .link import (
    EnergyParams,
    ReconstructionFlags,
    TransmissionOutcome,
    draw_outcomes,
    reconstruct_flags,
    relay_payload_bits,
    step_energy,
)
from .kalman import FilterState, StackedMeasurement, kf_update, stack_measurement
from .controller import (
    ControllerConfig,
    CostBreakdown,
    DecisionContext,
    DecisionSet,
    SensorDecision,
    apply_increment,
    evaluate_cost,
    expected_posterior_trace,
    optimize,
    simple_logic,
)
from .analysis import (
    BoundParams,
    RunMetrics,
    bound_constants,
    bound_curve,
    compute_metrics,
    estimate_nu,
)
from .harness import Scenario, TraceRecord, compare_controllers, run_scenario, sweep

__version__ = "0.1.0"
