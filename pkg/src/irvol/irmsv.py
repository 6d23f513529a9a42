"""Multivariate gap-time stochastic volatility with constant correlation.

Each asset's log-volatility follows its own univariate gap-time AR(1)
over a shared (post-synchronization) gap sequence; the latent processes
are mutually independent.  Cross-sectional dependence enters only through
the observation errors: r_t = H_t^(1/2) eps_t with eps_t ~ MVN(0, R),
H_t = diag(exp(h_{1,t}), ..., exp(h_{p,t})), and R a constant correlation
matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from irvol.core import gap_values
from irvol.irsv import (
    LOG_2PI,
    ForecastSummary,
    IrSvParams,
    _recurse_states,
    _require_positive_phi,
    forecast,
)

MIN_EIGENVALUE = 1e-10
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric positive-definite matrix with an exactly unit diagonal."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("a correlation matrix must be square")
        if arr.shape[0] < 1:
            raise ValueError("a correlation matrix needs at least one row")
        if not np.all(np.isfinite(arr)):
            raise ValueError("correlation entries must be finite")
        if arr.size > 1 and float(np.max(np.abs(arr - arr.T))) > SYMMETRY_TOL:
            raise ValueError("correlation matrix is not symmetric")
        if not np.all(np.diag(arr) == 1.0):
            raise ValueError("correlation matrix must have a unit diagonal")
        arr = (arr + arr.T) / 2.0
        eigvals = np.linalg.eigvalsh(arr)
        if float(eigvals[0]) <= MIN_EIGENVALUE:
            raise ValueError("correlation matrix is not positive definite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def p(self) -> int:
        return self.values.shape[0]

    def cholesky(self) -> np.ndarray:
        """Lower-triangular factor L with L @ L.T == values."""
        return np.linalg.cholesky(self.values)


def corr_from_lower(p: int, lower) -> np.ndarray:
    """Assemble a full matrix from the p*(p-1)/2 below-diagonal entries.

    Entries are in row-major lower-triangle order: (2,1), (3,1), (3,2), ...
    in one-based labels.  No validity check is performed here.
    """
    lower = np.asarray(lower, dtype=float)
    rows, cols = np.tril_indices(p, -1)
    if lower.size != rows.size:
        raise ValueError(f"expected {rows.size} lower-triangle entries, got {lower.size}")
    out = np.eye(p)
    out[rows, cols] = lower
    out[cols, rows] = lower
    return out


def lower_entries(matrix) -> np.ndarray:
    """Below-diagonal entries in the order used by ``corr_from_lower``."""
    arr = np.asarray(matrix, dtype=float)
    rows, cols = np.tril_indices(arr.shape[0], -1)
    return arr[rows, cols].copy()


def correlation_names(p: int) -> list[str]:
    """Column labels rho_12, rho_13, ... matching ``lower_entries`` order."""
    rows, cols = np.tril_indices(p, -1)
    sep = "" if p <= 9 else "_"
    return [f"rho_{c + 1}{sep}{r + 1}" for r, c in zip(rows, cols)]


@dataclass(frozen=True)
class IrMsvParams:
    """Per-asset (mu, phi, sigma) plus the observation correlation matrix."""

    mu: np.ndarray
    phi: np.ndarray
    sigma: np.ndarray
    correlation: CorrelationMatrix

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float)
        phi = np.array(self.phi, dtype=float)
        sigma = np.array(self.sigma, dtype=float)
        if mu.ndim != 1 or mu.shape != phi.shape or mu.shape != sigma.shape:
            raise ValueError("mu, phi, and sigma must be equal-length vectors")
        if mu.size < 2:
            raise ValueError("the multivariate model needs at least two assets")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(phi)) and np.all(np.isfinite(sigma))):
            raise ValueError("parameters must be finite")
        if np.any(np.abs(phi) >= 1.0) or np.any(phi == 0.0):
            raise ValueError("every phi must satisfy 0 < |phi| < 1")
        if np.any(sigma <= 0):
            raise ValueError("every sigma must be positive")
        if self.correlation.p != mu.size:
            raise ValueError("correlation matrix size must match the number of assets")
        for arr in (mu, phi, sigma):
            arr.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "sigma", sigma)

    @property
    def n_assets(self) -> int:
        return self.mu.size

    def asset(self, i: int) -> IrSvParams:
        """Marginal univariate parameters of asset i."""
        return IrSvParams(float(self.mu[i]), float(self.phi[i]), float(self.sigma[i]))


def simulate_irmsv(params: IrMsvParams, gaps, length: int, seed=None):
    """Simulate latent (p, T) log-volatilities and correlated (p, T) returns.

    All assets share one gap sequence (as produced by refresh sampling).
    Draw order is fixed: the (p, T) state-noise block first, then the
    (p, T) observation-noise block, so runs are seed-reproducible.
    """
    if length < 1:
        raise ValueError("length must be at least 1")
    for phi in params.phi:
        _require_positive_phi(float(phi))
    g = gap_values(gaps, count=length - 1, max_one=True)
    p = params.n_assets
    rng = np.random.default_rng(seed)
    z_state = rng.standard_normal((p, length))
    z_obs = rng.standard_normal((p, length))
    h = np.empty((p, length))
    for i in range(p):
        h[i] = _recurse_states(float(params.mu[i]), float(params.phi[i]),
                               float(params.sigma[i]), g, z_state[i])
    eps = params.correlation.cholesky() @ z_obs
    r = np.exp(h / 2.0) * eps
    return h, r


def joint_observation_density(r, h, correlation) -> float:
    """Joint log-density of one return vector given its log-volatilities.

    The covariance is H^(1/2) R H^(1/2) with H = diag(exp(h)); the 2*pi
    normalizing constant is included.  ``correlation`` may be a
    ``CorrelationMatrix`` or a plain symmetric array; a factorization
    failure (singular or non-PD matrix) raises ``ValueError``.
    """
    r_arr = np.asarray(r, dtype=float)
    h_arr = np.asarray(h, dtype=float)
    if r_arr.ndim != 1 or r_arr.shape != h_arr.shape:
        raise ValueError("r and h must be equal-length vectors")
    if isinstance(correlation, CorrelationMatrix):
        corr = correlation.values
    else:
        corr = np.asarray(correlation, dtype=float)
    if corr.shape != (r_arr.size, r_arr.size):
        raise ValueError("correlation matrix size must match the return vector")
    try:
        chol = np.linalg.cholesky(corr)
    except np.linalg.LinAlgError as exc:
        raise ValueError("correlation matrix is not positive definite") from exc
    eps = r_arr * np.exp(-h_arr / 2.0)
    y = np.linalg.solve(chol, eps)  # quadratic form via the triangular factor
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    quad = float(y @ y)
    return -0.5 * (r_arr.size * LOG_2PI + logdet + float(np.sum(h_arr)) + quad)


def forecast_msv(params: IrMsvParams, last_h, future_gaps, n_draws: int,
                 seed=None) -> tuple[ForecastSummary, ...]:
    """Per-asset forecast summaries from the last latent state vector.

    The latent recursions are independent across assets and the forecast
    target is E[r^2 | h] = exp(h) per asset, so the correlation matrix
    does not enter; marginal summaries are identical for any valid R.
    """
    last = np.asarray(last_h, dtype=float)
    if last.ndim != 1 or last.size != params.n_assets:
        raise ValueError("last_h must hold one value per asset")
    rng = np.random.default_rng(seed)
    return tuple(
        forecast(params.asset(i), float(last[i]), future_gaps, n_draws, rng)
        for i in range(params.n_assets)
    )
