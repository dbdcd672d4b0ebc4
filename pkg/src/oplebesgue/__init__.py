"""Lebesgue-type decompositions of positive semidefinite operators.

Splits a PSD operator S relative to another one T into an absolutely
continuous part and a mutually singular part, certifies when the split is
unique (always, in the finite-rank matrix model), and constructs the
diagonal trace-class pairs on which uniqueness genuinely fails.
"""

from .diagonal import (
    GeometricTail,
    L1Sequence,
    RatioCertificate,
    construct_unbounded_ratio,
    diag_decompose,
    diag_is_dominated,
    diag_uniqueness,
    sequence_from_json,
    sequence_to_json,
    counterexample_pair,
    truncate_to_matrix,
)
from .errors import (
    ConsistencyError,
    ConvergenceError,
    DimensionMismatchError,
    ValidationError,
)
from .functionals import (
    NormalFunctional,
    evaluate,
    functional_from_json,
    functional_lebesgue,
    functional_leq,
    functional_to_json,
    functional_uniqueness,
    kvn_sup_estimate,
    normality_gap,
    regular_part_approximants,
)
from .lebesgue import (
    IterationStep,
    IterationTrace,
    LebesgueDecomposition,
    UniquenessCertificate,
    ac_part_closed,
    ac_part_iterative,
    decompose,
    extremality_check,
    is_absolutely_continuous,
    is_dominated,
    uniqueness_certificate,
)
from .parallel_sum import is_singular_pair, nonzero_common_minorant, parallel_sum
from .psd_core import (
    DEFAULT_CONFIG,
    HermitianMatrix,
    PsdMatrix,
    SpectralDecomp,
    ToleranceConfig,
    eigh,
    hermitian_from_json,
    hs_inner,
    loewner_leq,
    matrix_to_json,
    op_norm,
    pinv_psd,
    psd_from_json,
    range_contained,
    range_projection,
    sqrt_psd,
    trace,
    trace_norm,
)

__version__ = "0.1.0"

__all__ = [
    "ConsistencyError",
    "ConvergenceError",
    "DEFAULT_CONFIG",
    "DimensionMismatchError",
    "GeometricTail",
    "HermitianMatrix",
    "IterationStep",
    "IterationTrace",
    "L1Sequence",
    "LebesgueDecomposition",
    "NormalFunctional",
    "PsdMatrix",
    "RatioCertificate",
    "SpectralDecomp",
    "ToleranceConfig",
    "UniquenessCertificate",
    "ValidationError",
    "ac_part_closed",
    "ac_part_iterative",
    "construct_unbounded_ratio",
    "decompose",
    "diag_decompose",
    "diag_is_dominated",
    "diag_uniqueness",
    "eigh",
    "evaluate",
    "extremality_check",
    "functional_from_json",
    "functional_lebesgue",
    "functional_leq",
    "functional_to_json",
    "functional_uniqueness",
    "hermitian_from_json",
    "hs_inner",
    "is_absolutely_continuous",
    "is_dominated",
    "is_singular_pair",
    "kvn_sup_estimate",
    "loewner_leq",
    "matrix_to_json",
    "nonzero_common_minorant",
    "normality_gap",
    "op_norm",
    "parallel_sum",
    "pinv_psd",
    "psd_from_json",
    "range_contained",
    "range_projection",
    "regular_part_approximants",
    "sequence_from_json",
    "sequence_to_json",
    "sqrt_psd",
    "counterexample_pair",
    "trace",
    "trace_norm",
    "truncate_to_matrix",
    "uniqueness_certificate",
]
