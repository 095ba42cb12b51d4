"""Non-linear positive maps on matrix algebras.

Hermitian spectral utilities, functional calculus with a jump at zero,
operator means, capacity integrals of matrices, sampled checkers for map
classes (monotone, supercongruent, concave, normal, positive type) and a
replication ledger of the worked examples.
"""

from ._accel import NUMBA_AVAILABLE, get_backend, set_backend, use_backend
from .calculus import (
    BUILTIN_FUNCTIONS,
    ScalarFunctionSpec,
    apply_function,
    builtin,
    function_from_json,
    jump_decompose,
    loewner_matrix,
    loewner_matrix_test,
    range_projection,
    staircase_lower,
    table_function,
    with_jump,
)
from .capacities import (
    Capacity,
    InteractionOperator,
    OperatorCapacity,
    capacity_from_json,
    capacity_from_mobius,
    choquet_matrix,
    choquet_matrix_operator,
    choquet_scalar,
    inclusion_exclusion_matrix,
    inclusion_exclusion_scalar,
    mobius,
    random_capacity,
    sugeno_matrix,
    sugeno_scalar,
)
from .errors import (
    PosmapsError,
    NonConvergence,
    DimMismatch,
    NotPsd,
    Singular,
    NotInvertible,
    DomainViolation,
    DegeneratePoints,
    NegativeJump,
    NoLimit,
    LengthMismatch,
    NegativeInput,
    NonMonotone,
    SpectrumOutOfRange,
    EvaluatorError,
    NonMonotoneInteraction,
)
from .herm import (
    DEFAULT_TOL,
    SpectralDecomp,
    Tolerance,
    eig_herm,
    herm,
    inv_psd,
    is_psd,
    loewner_leq,
    loewner_margin,
    matrix_from_json,
    matrix_to_json,
    rand_contraction,
    rand_psd,
    rand_psd_between,
    sqrt_psd,
)
from .map_classes import (
    MapSpec,
    PropertyReport,
    block_positive_definite,
    bounded_type_ratio,
    builtin_maps,
    check_concave,
    check_monotone,
    check_normal,
    check_normal_staircase,
    check_supercongruent,
    check_witness,
    get_map,
    gram_positive_type,
    replay,
    run_campaign,
)
from .means import MeanSpec, geometric_mean, geometric_mean_spec, mean_eval

__version__ = "0.1.0"
