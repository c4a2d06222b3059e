"""Laguerre-spectral deconvolution with triangular-Toeplitz model-error bounds.

Subpackage map:

- :mod:`lagdeconv.laguerre` — basis evaluation, signal expansion/synthesis.
- :mod:`lagdeconv.toeplitz` — lower-triangular Toeplitz algebra.
- :mod:`lagdeconv.deconv` — single/multi-location estimators, error operator.
- :mod:`lagdeconv.bounds` — closed-form lower bounds, spectral upper bound.
- :mod:`lagdeconv.groundwater` — KLE random fields and the transient flow solver.
- :mod:`lagdeconv.study` — Monte Carlo study driver and outputs.
- :mod:`lagdeconv.cli` — the ``study`` command-line entry point.
"""

from .laguerre import (
    LaguerreBasis,
    LaguerreSeries,
    TimeSeries,
    basis_matrix,
    coeff_l2_distance,
    eval_basis,
    expand,
    synthesize,
)
from .toeplitz import (
    LTTMatrix,
    SingularMatrixError,
    apply,
    from_green_series,
    invert,
    multiply,
    solve,
    spectral_norm,
)
from .deconv import (
    Estimate,
    Observation,
    ObservationSet,
    error_operator,
    reconstruction_error,
    solve_multi_averaged,
    solve_multi_lsq,
    solve_single,
)
from .bounds import (
    BoundReport,
    compute_bounds,
    dominant_error_coeffs,
    green_dominant_coeff,
    lower_bound_k1,
    lower_bound_k2,
    upper_bound,
)
from .groundwater import (
    CovarianceConfig,
    DomainConfig,
    FieldRealization,
    ImpulseResponse,
    KLEBasis,
    export_field_csv,
    greens_coeffs,
    homogeneous_peak_time,
    kle_build,
    sample_field,
    simulate_impulse,
    strip_impulse_response,
)
from .study import (
    StudyConfig,
    StudyRecord,
    StudySummary,
    classify_bifurcation,
    count_sign_changes,
    desk_config,
    emit_outputs,
    load_config,
    paper_config,
    reconstruct_boundary,
    run_study,
    summarize,
)

__version__ = "0.1.0"

__all__ = [
    "LaguerreBasis",
    "LaguerreSeries",
    "TimeSeries",
    "basis_matrix",
    "coeff_l2_distance",
    "eval_basis",
    "expand",
    "synthesize",
    "LTTMatrix",
    "SingularMatrixError",
    "apply",
    "from_green_series",
    "invert",
    "multiply",
    "solve",
    "spectral_norm",
    "Estimate",
    "Observation",
    "ObservationSet",
    "error_operator",
    "reconstruction_error",
    "solve_multi_averaged",
    "solve_multi_lsq",
    "solve_single",
    "BoundReport",
    "compute_bounds",
    "dominant_error_coeffs",
    "green_dominant_coeff",
    "lower_bound_k1",
    "lower_bound_k2",
    "upper_bound",
    "CovarianceConfig",
    "DomainConfig",
    "FieldRealization",
    "ImpulseResponse",
    "KLEBasis",
    "export_field_csv",
    "greens_coeffs",
    "homogeneous_peak_time",
    "kle_build",
    "sample_field",
    "simulate_impulse",
    "strip_impulse_response",
    "StudyConfig",
    "StudyRecord",
    "StudySummary",
    "classify_bifurcation",
    "count_sign_changes",
    "desk_config",
    "emit_outputs",
    "load_config",
    "paper_config",
    "reconstruct_boundary",
    "run_study",
    "summarize",
    "__version__",
]
