"""Recursive direct weight optimization for 1-D nonlinear regression.

Estimates a nonlinear map from noisy samples by weighting the outputs of all
samples whose regressor falls inside a window around the query point.  The
weights maximize a worst-case accuracy objective over the simplex, have a
closed form, and admit an exactly equivalent one-pass streaming update.
Search-based oracles certify the closed form, and a simulation harness
checks the computable error bound on seeded synthetic runs.
"""

from .core import (
    ActiveSet,
    CenteredDistance,
    EstimatorConfig,
    NoSupportError,
    Sample,
    WeightSolution,
    active_set,
    batch_weights,
    batch_weights_arrays,
    centered_distance,
    estimate,
    grid_estimates,
    objective_value,
    optimal_objective,
    phi_hat_values,
    signed_objective_value,
)
from .oracle import (
    OracleForm,
    OracleResult,
    maximize_signed,
    maximize_simplex,
    random_instance,
)
from .simulate import (
    Atan,
    ExperimentReport,
    ExperimentSpec,
    FunctionSpec,
    NoisySample,
    PiecewiseLinear,
    QueryRecord,
    Sine,
    error_bound,
    generate_dataset,
    lipschitz_scan,
    load_spec,
    max_relative_deviation,
    run_experiment,
)
from .streaming import (
    Absorbed,
    LedgerDisabledError,
    LedgerEntry,
    RecursiveState,
    Skipped,
    StreamingGrid,
)

__version__ = "0.1.0"

__all__ = [
    "ActiveSet",
    "CenteredDistance",
    "EstimatorConfig",
    "NoSupportError",
    "Sample",
    "WeightSolution",
    "active_set",
    "batch_weights",
    "batch_weights_arrays",
    "centered_distance",
    "estimate",
    "grid_estimates",
    "objective_value",
    "optimal_objective",
    "phi_hat_values",
    "signed_objective_value",
    "OracleForm",
    "OracleResult",
    "maximize_signed",
    "maximize_simplex",
    "random_instance",
    "Atan",
    "ExperimentReport",
    "ExperimentSpec",
    "FunctionSpec",
    "NoisySample",
    "PiecewiseLinear",
    "QueryRecord",
    "Sine",
    "error_bound",
    "generate_dataset",
    "lipschitz_scan",
    "load_spec",
    "max_relative_deviation",
    "run_experiment",
    "Absorbed",
    "LedgerDisabledError",
    "LedgerEntry",
    "RecursiveState",
    "Skipped",
    "StreamingGrid",
    "__version__",
]
