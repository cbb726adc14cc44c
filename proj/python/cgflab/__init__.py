"""Cumulant generating function models of joint dependence.

Thin wrapper over the compiled extension: partition algebra, sample
cumulants, the elliptical CGF model family, rank-based estimation,
analytic tail/density approximations, and deterministic simulation.
"""

from ._cgflab import (
    EllipticalCgf,
    FitError,
    GammaMixture,
    InputError,
    NumericError,
    bell_number,
    build_gamma,
    cornish_fisher_quantile,
    cumulant_of_sum,
    enumerate_partitions,
    estimate_covariance,
    fit_coefficients,
    fit_gamma_mixture,
    gaussian_entropy,
    group_cov,
    group_cumulants,
    kendall_tau,
    mobius_weight,
    model_from_json,
    monte_carlo_bands,
    powered_exp_cov,
    saddlepoint_density,
    sample_cumulants_of_series,
    sample_joint_cumulant,
    sample_model,
    sum_cumulants,
    sum_tail_cdf,
)

__all__ = [
    "EllipticalCgf",
    "FitError",
    "GammaMixture",
    "InputError",
    "NumericError",
    "bell_number",
    "build_gamma",
    "cornish_fisher_quantile",
    "cumulant_of_sum",
    "enumerate_partitions",
    "estimate_covariance",
    "fit_coefficients",
    "fit_gamma_mixture",
    "gaussian_entropy",
    "group_cov",
    "group_cumulants",
    "kendall_tau",
    "mobius_weight",
    "model_from_json",
    "monte_carlo_bands",
    "powered_exp_cov",
    "saddlepoint_density",
    "sample_cumulants_of_series",
    "sample_joint_cumulant",
    "sample_model",
    "sum_cumulants",
    "sum_tail_cdf",
]
