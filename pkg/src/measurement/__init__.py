"""
Indirect Measurement Module
===========================

Schemes (U, M, rho_P), their Kraus representation and the trade-off
relations evaluated on them.

Components:
- scheme.py: schemes, unbiased observable, noise operator, variance decomposition
- kraus.py: Kraus extraction, post-measurement states, purification checks
- tradeoff.py: survival activity, TUR bound, noise-disturbance relation
"""

from .kraus import (
    PurificationReport,
    PurifiedRun,
    full_space_post_measurement,
    kraus_from_scheme,
    meter_statistics,
    post_measurement_state,
    purify_and_verify,
)
from .scheme import (
    ConsistencyError,
    MeasurementError,
    MeasurementScheme,
    VarianceDecomposition,
    derive_unbiased_observable,
    heisenberg_moments,
    noise_operator,
    unbiasedness_residual,
    variance_decomposition,
)
from .tradeoff import (
    DegenerateObservableError,
    MissingZeroOutcomeError,
    NdrCheck,
    NdrRecord,
    TradeoffError,
    TurReport,
    UnbiasednessError,
    commutator_mean_abs,
    disturbance_operator,
    ndr_check,
    ndr_frontier,
    ndr_record,
    noise_floor,
    survival_activity,
    survival_activity_candidates,
    tur_bound,
)

__all__ = [
    "ConsistencyError",
    "DegenerateObservableError",
    "MeasurementError",
    "MeasurementScheme",
    "MissingZeroOutcomeError",
    "NdrCheck",
    "NdrRecord",
    "PurificationReport",
    "PurifiedRun",
    "TradeoffError",
    "TurReport",
    "UnbiasednessError",
    "VarianceDecomposition",
    "commutator_mean_abs",
    "derive_unbiased_observable",
    "disturbance_operator",
    "full_space_post_measurement",
    "heisenberg_moments",
    "kraus_from_scheme",
    "meter_statistics",
    "ndr_check",
    "ndr_frontier",
    "ndr_record",
    "noise_floor",
    "noise_operator",
    "post_measurement_state",
    "purify_and_verify",
    "survival_activity",
    "survival_activity_candidates",
    "tur_bound",
    "unbiasedness_residual",
    "variance_decomposition",
]
