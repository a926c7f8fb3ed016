"""MMSE covariance shrinkage: oracle, LW, RBLW and OAS estimators."""

from .errors import (
    DegenerateSampleError,
    InvalidInputError,
    InvalidParameterError,
    MissingParameterError,
    NonConvergenceError,
    ShrinkageError,
    SingularMatrixError,
)
from .estimators import (
    CovEstimate,
    Method,
    RhoParams,
    SampleCov,
    SampleSet,
    ShrinkageStatistics,
    estimate,
    lw_rho,
    lw_rho_star,
    oas_iterate,
    oas_rho,
    oracle_rho,
    rblw_rho,
    rblw_rho_star,
    rho_param,
    sample_covariance,
    shrinkage_target,
    statistics,
)
from .models import CovModel, GaussianSampler, ar1_cov, fbm_cov, sample

__version__ = "0.1.0"
