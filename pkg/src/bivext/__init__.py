"""
Bayesian nonparametric inference of bivariate extremal dependence with Bernstein polynomials.
"""

from ._errors import (
    BivextError,
    BracketError,
    ChainFormatError,
    ConvergenceError,
    DegenerateDataError,
    DensityUnderflowWarning,
    DomainError,
    EmptyChainError,
    InfeasiblePrefixError,
    InitializationError,
    InvalidCoefficientsError,
)
from ._extremal import (
    angular_cdf,
    angular_density,
    AngularCoefficients,
    beta_to_eta,
    chi,
    elevate_degree,
    eta_to_beta,
    exceedance_prob,
    pickands,
    pickands_d1,
    pickands_d2,
    PickandsCoefficients,
    Restriction,
    stable_tail_L,
    tail_dep_R,
    validate_angular,
    validate_pickands,
    ValidityReport,
    Violation,
)
from ._hooks import Hook
from ._likelihood import (
    BernsteinLikelihood,
    FrechetSample,
    log_density,
    log_likelihood,
    log_likelihood_eta,
    max_stable_cdf,
)
from ._margins import (
    from_unit_frechet,
    gev_cdf,
    gev_fit_mle,
    gev_log_likelihood,
    gev_pdf,
    gev_quantile,
    GevFit,
    GevParams,
    to_unit_frechet,
)
from ._mcmc import (
    acceptance_log_ratio,
    ChainOutput,
    ChainState,
    Diagnostics,
    diagnostics,
    effective_sample_size,
    KProposal,
    McmcConfig,
    propose_k,
    run,
    run_chains,
    step,
    TransDimensionalSampler,
)
from ._models import (
    AsymmetricLogistic,
    copula_cdf,
    DependenceModel,
    ExtremalT,
    HueslerReiss,
    ise,
    parse_model,
    sample_bivariate,
    SymmetricLogistic,
    true_chi,
    true_exceedance_prob,
    true_pickands,
    true_point_masses,
)
from ._numerics import (
    bernstein_basis,
    beta_density,
    bisection_invert,
    bisection_invert_many,
    log_gamma,
    quadrature,
    regularized_incomplete_beta,
    std_normal_cdf,
    student_t_cdf,
    ToleranceConfig,
)
from ._prior import (
    beta_interval,
    eta_interval,
    Interval,
    k_prior_pmf,
    KPrior,
    NegBinPrior,
    p1_bounds,
    parse_k_prior,
    PoissonPrior,
    prior_logdensity_beta,
    prior_logdensity_eta,
    PriorConfig,
    sample_eta,
    sample_k,
    sample_p0,
    sample_prior,
)
from ._summary import (
    ConditionalExceedance,
    conditional_exceedance,
    posterior_mean_ise,
    posterior_mean_pickands,
    PosteriorSummary,
    predictive_exceedance,
    predictive_grid,
    Quantiles,
    summarize,
)


__all__ = [
    "acceptance_log_ratio",
    "angular_cdf",
    "angular_density",
    "AngularCoefficients",
    "AsymmetricLogistic",
    "bernstein_basis",
    "BernsteinLikelihood",
    "beta_density",
    "beta_interval",
    "beta_to_eta",
    "bisection_invert",
    "bisection_invert_many",
    "BivextError",
    "BracketError",
    "ChainFormatError",
    "ChainOutput",
    "ChainState",
    "chi",
    "ConditionalExceedance",
    "conditional_exceedance",
    "ConvergenceError",
    "copula_cdf",
    "DegenerateDataError",
    "DensityUnderflowWarning",
    "DependenceModel",
    "Diagnostics",
    "diagnostics",
    "DomainError",
    "effective_sample_size",
    "elevate_degree",
    "EmptyChainError",
    "eta_interval",
    "eta_to_beta",
    "exceedance_prob",
    "ExtremalT",
    "FrechetSample",
    "from_unit_frechet",
    "gev_cdf",
    "gev_fit_mle",
    "gev_log_likelihood",
    "gev_pdf",
    "gev_quantile",
    "GevFit",
    "GevParams",
    "Hook",
    "HueslerReiss",
    "InfeasiblePrefixError",
    "InitializationError",
    "Interval",
    "InvalidCoefficientsError",
    "ise",
    "k_prior_pmf",
    "KPrior",
    "KProposal",
    "log_density",
    "log_gamma",
    "log_likelihood",
    "log_likelihood_eta",
    "max_stable_cdf",
    "McmcConfig",
    "NegBinPrior",
    "p1_bounds",
    "parse_k_prior",
    "parse_model",
    "pickands",
    "pickands_d1",
    "pickands_d2",
    "PickandsCoefficients",
    "PoissonPrior",
    "posterior_mean_ise",
    "posterior_mean_pickands",
    "PosteriorSummary",
    "predictive_exceedance",
    "predictive_grid",
    "prior_logdensity_beta",
    "prior_logdensity_eta",
    "PriorConfig",
    "propose_k",
    "quadrature",
    "Quantiles",
    "regularized_incomplete_beta",
    "Restriction",
    "run",
    "run_chains",
    "sample_bivariate",
    "sample_eta",
    "sample_k",
    "sample_p0",
    "sample_prior",
    "stable_tail_L",
    "std_normal_cdf",
    "step",
    "student_t_cdf",
    "summarize",
    "SymmetricLogistic",
    "tail_dep_R",
    "to_unit_frechet",
    "ToleranceConfig",
    "TransDimensionalSampler",
    "true_chi",
    "true_exceedance_prob",
    "true_pickands",
    "true_point_masses",
    "validate_angular",
    "validate_pickands",
    "ValidityReport",
    "Violation",
]
__author__ = "Daniel Jeong"
__version__ = "0.1.0"
