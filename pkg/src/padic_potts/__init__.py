"""Exact p-adic Gibbs measures for the q-state Potts model on Cayley
trees: arbitrary-precision p-adic arithmetic, the analytic layer
(exp/log/sqrt with exact domain guards), the boundary-field recursion and
its translation-invariant solver, finite-volume measure enumeration, and a
phase-transition classifier with machine-checkable witnesses."""

from .analytic import (
    DomainBall,
    QuadraticSolution,
    SqrtResult,
    exp_m1,
    exp_p,
    is_quadratic_residue,
    log1p,
    log_p,
    solve_quadratic_monic,
    sqrt,
)
from .classifier import (
    BoundednessReport,
    CrossCheckReport,
    Outcome,
    Verdict,
    Witnesses,
    boundedness_verdict,
    classify,
    condition_table_verdict,
    cross_check,
)
from .gibbs import (
    DEFAULT_ENUMERATION_CAP,
    BoundaryFieldAssignment,
    CayleyVolume,
    CompatibilityReport,
    EnumerationCapError,
    MeasureTable,
    TransitionMatrix,
    build_volume,
    check_compatibility,
    hamiltonian,
    marginal_path_norms,
    partition_and_measures,
    transition_matrix,
    weight,
)
from .padic import (
    DomainError,
    MixedPrimeError,
    PadicError,
    PadicNorm,
    PadicNumber,
    PrecisionExhaustedError,
    equal_to_precision,
    is_prime,
    parse_rational,
)
from .recursion import (
    DiscriminantReport,
    FieldVector,
    ModelParams,
    NormReport,
    TIReduction,
    TIRoot,
    TISolveResult,
    boltzmann_ratio,
    boundary_field_from_recursion,
    contraction_trace,
    discriminant_analysis,
    from_primed_coordinates,
    lift_root_to_field,
    norm_case_analysis,
    primed_coordinates,
    recursion_field_from_boundary,
    recursion_step,
    sample_domain_field,
    solve_ti_k1,
    solve_ti_k2,
    ti_quadratic_coefficients,
    ti_root_search_mod,
    ti_reduction,
    ti_residual,
)

__version__ = "0.1.0"
