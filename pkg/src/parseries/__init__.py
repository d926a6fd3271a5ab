"""Profile and marginal likelihood inference for the common autocorrelation
of parallel Gaussian series with separable covariance, plus the seeded
Monte Carlo experiments that verify the closed-form information theory."""

from .covariance import (
    Ar1Model,
    CovBundle,
    DiagonalVar,
    FullPd,
    GreenMatrix,
    ScalarVar,
    SigmaSpec,
    build_sigma,
    gamma_of,
    v_factor,
)
from .errors import DegenerateLikelihoodError, DomainError, ExperimentError
from .likelihood import (
    MODELS,
    FitResult,
    LikelihoodEval,
    distance_loglik_model_I,
    distance_loglik_model_II,
    distance_score_model_I,
    distance_score_model_II,
    efficiency_II_vs_I,
    evaluate,
    expected_info,
    fit_beta,
    markov_conditional_loglik,
    markov_conditional_score,
    profile_loglik,
    score,
    ut_subgroup_loglik,
    ut_subgroup_score,
)
from .projection import (
    DistancePair,
    Projector,
    distance_pair,
    make_projector,
    sequential_projectors,
)
from .sampling import (
    derive_seed,
    sample_gaussian,
    sample_gaussian_stack,
    sample_haar_columns,
    sample_haar_orthogonal,
    sample_haar_stack,
)

__version__ = "0.1.0"
