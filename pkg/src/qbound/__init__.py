"""Variance bounds for quantum phase estimation beyond the lowest order.

Shifted-state and derivative constraints on unbiased estimators generate a
family of measurement-optimized variance bounds; this package computes them
for dense finite-dimensional states, builds the measurement and estimator
that attain them, and reproduces the few-copy threshold study for a noisy
qubit.
"""

__version__ = "0.1.0"

from .classical import (
    POVM,
    BoundResult,
    InformationMatrix,
    ProbabilityModel,
    chi2_divergence,
    classical_bound,
    classical_info_matrix,
    optimal_estimator,
    probabilities,
    projective_povm,
)
from .errors import QBoundError
from .measurement import (
    SaturationReport,
    optimal_coefficients,
    optimal_povm,
    saturating_measurement,
    saturation_check,
)
from .models import (
    CallableFamily,
    DepolarizedPureModel,
    Interval,
    QubitPhaseModel,
    StateFamily,
    TensorPowerFamily,
    THETA_FULL,
    binary_entropy_nats,
    bloch_evolve,
    bloch_to_density,
    entropy_to_bloch_length,
    equatorial_qubit_ket,
)
from .montecarlo import (
    SampleRun,
    evaluate_estimator,
    exact_moments,
    grid_mle,
    sample,
)
from .mshot import (
    MShotContext,
    qba_entry_mshot,
    qbh11_mshot,
    qh_entry_mshot,
)
from .observables import (
    ObservableKind,
    SupportDiagnostics,
    TestObservable,
    TestObservableSet,
    abel_set,
    barankin_set,
    bhattacharyya_set,
    validate_support,
)
from .operators import (
    SpectralDecomposition,
    SupportProjector,
    omega_apply,
    omega_apply_vectorized,
    spectral_decompose,
    support_projector,
    sym_pinv,
    tensor_power,
)
from .quantum import (
    OptimizerConfig,
    abel_bound_at_offsets,
    bound_from_matrix,
    hcrb_classical_sup,
    pauli_components,
    qcrb,
    quantum_chi2,
    quantum_info_function,
    quantum_info_matrix,
    qubit_q_entry,
    sup_over_testpoints,
)

__all__ = [
    "__version__",
    "POVM", "BoundResult", "InformationMatrix", "ProbabilityModel",
    "chi2_divergence", "classical_bound", "classical_info_matrix",
    "optimal_estimator", "probabilities", "projective_povm",
    "QBoundError",
    "SaturationReport", "optimal_coefficients", "optimal_povm",
    "saturating_measurement", "saturation_check",
    "CallableFamily", "DepolarizedPureModel", "Interval", "QubitPhaseModel",
    "StateFamily", "TensorPowerFamily", "THETA_FULL", "binary_entropy_nats",
    "bloch_evolve", "bloch_to_density", "entropy_to_bloch_length",
    "equatorial_qubit_ket",
    "SampleRun", "evaluate_estimator", "exact_moments", "grid_mle", "sample",
    "MShotContext", "qba_entry_mshot", "qbh11_mshot", "qh_entry_mshot",
    "ObservableKind", "SupportDiagnostics", "TestObservable", "TestObservableSet",
    "abel_set", "barankin_set", "bhattacharyya_set", "validate_support",
    "SpectralDecomposition", "SupportProjector", "omega_apply",
    "omega_apply_vectorized", "spectral_decompose", "support_projector",
    "sym_pinv", "tensor_power",
    "OptimizerConfig", "abel_bound_at_offsets", "bound_from_matrix",
    "hcrb_classical_sup", "pauli_components", "qcrb", "quantum_chi2",
    "quantum_info_function", "quantum_info_matrix", "qubit_q_entry",
    "sup_over_testpoints",
]
