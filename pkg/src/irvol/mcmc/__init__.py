"""Bayesian estimation: priors, adaptive samplers, fitting, summaries."""

from irvol.mcmc.chain import (
    McmcChain,
    McmcConfig,
    ParameterSummary,
    PosteriorSummary,
    effective_sample_size,
    summarize,
)
from irvol.mcmc.fit import fit_irmsv, fit_irsv
from irvol.mcmc.priors import (
    IrMsvPriors,
    IrSvPriors,
    log_prior_irmsv,
    log_prior_irsv,
)
from irvol.mcmc.samplers import (
    AdaptiveScale,
    VectorAdaptiveScale,
    adaptive_rwm_scalar,
    correlation_block_step,
)

__all__ = [
    "AdaptiveScale",
    "IrMsvPriors",
    "IrSvPriors",
    "McmcChain",
    "McmcConfig",
    "ParameterSummary",
    "PosteriorSummary",
    "VectorAdaptiveScale",
    "adaptive_rwm_scalar",
    "correlation_block_step",
    "effective_sample_size",
    "fit_irmsv",
    "fit_irsv",
    "log_prior_irmsv",
    "log_prior_irsv",
    "summarize",
]
