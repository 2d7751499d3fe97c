"""Greedy co-selection of basis functions and measurement functionals, with
interpolation-based reconstruction and convergence-bound auditing."""

import os as _os

_threads = _os.environ.get("GEIM_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .core import (
    HILBERT,
    SUP,
    DegenerateInputError,
    DiscreteFunction,
    FunctionSet,
    Functional,
    Grid,
    GridMismatchError,
    UnsupportedModeError,
    apply_functional,
    dual_norm,
    inner,
    norm,
    normalize_dual,
)
from .families import (
    DIRAC,
    FOURIER_MIX,
    GAUSSIAN_BUMP,
    LOCAL_AVERAGE,
    RATIONAL_PEAK,
    DictionarySpec,
    FamilySpec,
    build_dictionary,
    build_family,
    dirac_dictionary,
    unisolvence_rank,
)
from .greedy import (
    FIXED_SIZE,
    FULL,
    GROWING,
    GreedyConfig,
    GreedyResult,
    UnisolvenceError,
    greedy_step,
    run_geim,
    select_first,
)
from .interp import interp_error, interpolate, measure, reconstruct, solve_coeffs
from .analysis import (
    AnalysisReport,
    GramSchmidtCoefficients,
    IllPosedInterpolationError,
    RankDeficientError,
    build_report,
    gram_schmidt_matrix,
    kolmogorov_widths,
    lebesgue_constant,
    lebesgue_empirical,
    lebesgue_hilbert,
    lebesgue_sup,
    lebesgue_upper_bound,
    project,
    projection_product_inequality,
    worst_projection_errors,
)
from .rates import (
    DecayFit,
    RateAudit,
    audit_run,
    beta_coeff,
    c1_zeta_constant,
    product_bound_check,
    fit_decay,
    gamma_sequence,
    index_split,
    monotone_coeff,
    even_index_bound_check,
    product_bound_sweep,
)
from .estimator import GeneralizedInterpolator

__version__ = "0.1.0"
