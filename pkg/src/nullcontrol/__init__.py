"""Null-controllability of diagonal evolution equations through exponential moment problems."""

from .eigen import hermitian_min_eig, jacobi_eigenvalues
from .gram import (
    GammaSequence,
    GramMatrix,
    gamma_sequence,
    gram_matrix,
    gram_quadrature_oracle,
    phi,
)
from .minimality import boas_certificate, classify_minimality, scaled_gamma_bound
from .moments import (
    ControlSignal,
    IllConditionedError,
    MomentTargets,
    build_biorthogonal,
    solvability_diagnostic,
    solve_truncated_moment,
    verify_moments,
)
from .perturbation import (
    deviation_ratio,
    perturbed_controllability_check,
    strip_deviation_mass,
    transfer_bound,
)
from .simulator import modal_state, quadrature_state_oracle, verify_null_controllability
from .spectral import (
    ControlProblem,
    DeviationRule,
    ExponentialFamily,
    InputVector,
    Spectrum,
    build_spectrum,
    explicit,
    heat,
    imaginary_ladder,
    strip_perturbed,
    exponential_family,
    validate_spectrum,
)
from .synthesis import moment_targets_from_state, realify, synthesize_null_control

__version__ = "0.1.0"
