"""Spectral simulation and modulus-only reconstruction of pseudo-spin networks."""

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    CapabilityError,
    DarkStateError,
    FewerPeaksError,
    GatewayTomoError,
    GaugeDegeneracyError,
    IllConditionedError,
    InconsistentDataError,
    InputError,
    NearZeroDivisionError,
    NotEstimableError,
    NumericError,
    RankDeficientError,
    SignAmbiguityError,
)
from .estimation import (
    ExtrapolationFit,
    SpectrumEstimate,
    estimate_spectrum_fft,
    extrapolate_t0,
)
from .graphs import (
    AccessPlan,
    BranchPeel,
    CyclePlan,
    NetworkGraph,
    TopologyClass,
    TopologyKind,
    classify_topology,
    compute_access_plan,
    edge_key,
    graph_from_json,
    graph_to_json,
    infection_closure,
    is_estimable,
    is_infecting,
    minimum_infecting_sets,
)
from .measurement import (
    DecayModel,
    DecaySeries,
    Provenance,
    SpectralMeasurement,
    TimeSignal,
    decay_series_from_json,
    decay_series_to_json,
    measure_decaying,
    measure_exact,
    measure_shots,
    measurement_from_json,
    measurement_to_json,
    return_amplitude,
    signal_from_json,
    signal_to_json,
)
from .reconstruction import (
    CoefficientTable,
    CycleDiagnostics,
    ReconstructionResult,
    peel_branch,
    reconstruct,
    reconstruct_chain,
    resolve_family_signs,
    result_to_json,
    solve_cycle_moments,
)
from .spectral import (
    EigenSystem,
    HamiltonianParams,
    SymmetricMatrix,
    assemble_single_excitation,
    eigendecompose,
    gauge_fix,
    params_from_json,
    params_to_json,
)

__all__ = [
    "AccessPlan",
    "BranchPeel",
    "CapabilityError",
    "CoefficientTable",
    "CycleDiagnostics",
    "CyclePlan",
    "DEFAULT_TOLERANCES",
    "DarkStateError",
    "DecayModel",
    "DecaySeries",
    "EigenSystem",
    "ExtrapolationFit",
    "FewerPeaksError",
    "GatewayTomoError",
    "GaugeDegeneracyError",
    "HamiltonianParams",
    "IllConditionedError",
    "InconsistentDataError",
    "InputError",
    "NearZeroDivisionError",
    "NetworkGraph",
    "NotEstimableError",
    "NumericError",
    "Provenance",
    "RankDeficientError",
    "ReconstructionResult",
    "SignAmbiguityError",
    "SpectralMeasurement",
    "SpectrumEstimate",
    "SymmetricMatrix",
    "TimeSignal",
    "Tolerances",
    "TopologyClass",
    "TopologyKind",
    "assemble_single_excitation",
    "classify_topology",
    "compute_access_plan",
    "decay_series_from_json",
    "decay_series_to_json",
    "edge_key",
    "eigendecompose",
    "estimate_spectrum_fft",
    "extrapolate_t0",
    "gauge_fix",
    "graph_from_json",
    "graph_to_json",
    "infection_closure",
    "is_estimable",
    "is_infecting",
    "measure_decaying",
    "measure_exact",
    "measure_shots",
    "measurement_from_json",
    "measurement_to_json",
    "minimum_infecting_sets",
    "params_from_json",
    "params_to_json",
    "peel_branch",
    "reconstruct",
    "reconstruct_chain",
    "resolve_family_signs",
    "result_to_json",
    "return_amplitude",
    "signal_from_json",
    "signal_to_json",
    "solve_cycle_moments",
]

__version__ = "0.1.0"
