"""Univariate gap-time stochastic volatility model.

Log-volatility follows a gap-time AR(1): over a gap g the persistence is
``phi**g`` and the innovation variance is
``sigma_eta**2 * (1 - phi**(2*g)) / (1 - phi**2)``, so the latent process
has the same stationary law N(mu, sigma_eta**2 / (1 - phi**2)) no matter
how the observation grid looks.  Returns are conditionally Gaussian with
variance exp(h).

Simulation recursion (T observations, gaps g_2..g_T in (0, 1]):

    h_1 = mu + sqrt(sigma_eta**2 / (1 - phi**2)) * z_1
    h_j = mu + phi**g_j * (h_{j-1} - mu)
             + sigma_eta * sqrt((1 - phi**(2*g_j)) / (1 - phi**2)) * z_j
    r_j = exp(h_j / 2) * e_j

with z, e independent standard normals.  ``simulate_irsv`` draws all
state noise z first, then all observation noise e, so runs are
reproducible for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from irvol.core import gap_values

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class IrSvParams:
    """Location mu, persistence phi, and state noise scale sigma_eta.

    Stationarity needs 0 < |phi| < 1.  Fractional gap powers are only
    defined for positive phi, so simulation, densities, and fitting all
    reject phi <= 0; negative phi is unsupported throughout.
    """

    mu: float
    phi: float
    sigma_eta: float

    def __post_init__(self):
        for name in ("mu", "phi", "sigma_eta"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not (abs(self.phi) < 1.0) or self.phi == 0.0:
            raise ValueError("phi must satisfy 0 < |phi| < 1")
        if self.sigma_eta <= 0:
            raise ValueError("sigma_eta must be positive")

    @property
    def stationary_var(self) -> float:
        """Unconditional variance of the log-volatility."""
        return self.sigma_eta**2 / (1.0 - self.phi**2)


def _require_positive_phi(phi: float) -> None:
    if phi <= 0:
        raise ValueError("fractional gap powers need phi in (0, 1); phi <= 0 is unsupported")


@dataclass(frozen=True)
class LatentPath:
    """Realized log-volatility path aligned with a return series."""

    h: np.ndarray

    def __post_init__(self):
        arr = np.array(self.h, dtype=float)
        if arr.ndim != 1:
            raise ValueError("h must be one-dimensional")
        if not np.all(np.isfinite(arr)):
            raise ValueError("h must contain only finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "h", arr)

    def __len__(self) -> int:
        return self.h.size


def _recurse_states(mu: float, phi: float, sigma_eta: float, gaps: np.ndarray,
                    z: np.ndarray) -> np.ndarray:
    """Run the latent recursion given standard-normal state noise z."""
    omp = 1.0 - phi**2
    length = z.size
    h = np.empty(length)
    x = math.sqrt(sigma_eta**2 / omp) * z[0]
    h[0] = mu + x
    if length > 1:
        coef = phi**gaps
        innov = (sigma_eta * np.sqrt((1.0 - phi ** (2.0 * gaps)) / omp)) * z[1:]
        j = 1
        for a, w in zip(coef.tolist(), innov.tolist()):
            x = a * x + w
            h[j] = mu + x
            j += 1
    return h


def simulate_irsv(params: IrSvParams, gaps, length: int, seed=None):
    """Simulate (LatentPath, returns) over the given scaled gap sequence.

    ``gaps`` supplies g_j for j = 2..length and must lie in (0, 1].
    """
    if length < 1:
        raise ValueError("length must be at least 1")
    _require_positive_phi(params.phi)
    g = gap_values(gaps, count=length - 1, max_one=True)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(length)
    e = rng.standard_normal(length)
    h = _recurse_states(params.mu, params.phi, params.sigma_eta, g, z)
    r = np.exp(h / 2.0) * e
    return LatentPath(h), r


def stationary_state_density(h: float, params: IrSvParams) -> float:
    """Log-density of the stationary law of log-volatility (first state)."""
    var = params.stationary_var
    return -0.5 * (LOG_2PI + math.log(var) + (h - params.mu) ** 2 / var)


def state_transition_density(h_curr: float, h_prev: float, gap: float,
                             params: IrSvParams) -> float:
    """Log-density of the gap-time AR(1) transition h_prev -> h_curr.

    Mean is mu + phi**gap * (h_prev - mu) and variance
    sigma_eta**2 * (1 - phi**(2*gap)) / (1 - phi**2); ``gap`` must lie in
    (0, 1].  For the first state (no predecessor) use
    ``stationary_state_density``.
    """
    if not (0.0 < gap <= 1.0):
        raise ValueError("gap must lie in (0, 1]")
    _require_positive_phi(params.phi)
    mean = params.mu + params.phi**gap * (h_prev - params.mu)
    var = params.stationary_var * (1.0 - params.phi ** (2.0 * gap))
    return -0.5 * (LOG_2PI + math.log(var) + (h_curr - mean) ** 2 / var)


def observation_density(r, h):
    """Log-density of a return given log-volatility: N(0, exp(h)) at r.

    Accepts scalars or arrays (broadcasting elementwise).
    """
    r_arr = np.asarray(r, dtype=float)
    h_arr = np.asarray(h, dtype=float)
    out = -0.5 * (LOG_2PI + h_arr + np.square(r_arr) * np.exp(-h_arr))
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class ForecastSummary:
    """Per-horizon predictive summaries of h and of E[r^2 | h] = exp(h).

    Arrays are indexed by forecast step (one entry per future gap).
    """

    gaps: np.ndarray
    h_mean: np.ndarray
    h_q025: np.ndarray
    h_q500: np.ndarray
    h_q975: np.ndarray
    r2_mean: np.ndarray
    r2_q025: np.ndarray
    r2_q500: np.ndarray
    r2_q975: np.ndarray


def forecast(params: IrSvParams, last_h: float, future_gaps, n_draws: int,
             seed=None) -> ForecastSummary:
    """Simulate the state recursion forward and summarize per horizon.

    ``future_gaps`` are the gap times of the future observations (any
    positive reals, in the same time units the model was specified in).
    ``n_draws`` independent paths start from ``last_h``; the summaries are
    Monte Carlo means/quantiles of h and of exp(h) per horizon.
    """
    g = np.asarray(future_gaps, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise ValueError("future_gaps must be a nonempty one-dimensional sequence")
    if not np.all(np.isfinite(g)) or np.any(g <= 0):
        raise ValueError("future gap times must be positive and finite")
    if n_draws < 1:
        raise ValueError("n_draws must be at least 1")
    _require_positive_phi(params.phi)
    rng = np.random.default_rng(seed)
    omp = 1.0 - params.phi**2
    coef = params.phi**g
    sd = params.sigma_eta * np.sqrt((1.0 - params.phi ** (2.0 * g)) / omp)
    x = np.full(n_draws, last_h - params.mu)
    paths = np.empty((g.size, n_draws))
    for k in range(g.size):
        x = coef[k] * x + sd[k] * rng.standard_normal(n_draws)
        paths[k] = params.mu + x
    h_q = np.quantile(paths, [0.025, 0.5, 0.975], axis=1)
    r2 = np.exp(paths)
    r2_q = np.quantile(r2, [0.025, 0.5, 0.975], axis=1)
    return ForecastSummary(
        gaps=g,
        h_mean=paths.mean(axis=1),
        h_q025=h_q[0],
        h_q500=h_q[1],
        h_q975=h_q[2],
        r2_mean=r2.mean(axis=1),
        r2_q025=r2_q[0],
        r2_q500=r2_q[1],
        r2_q975=r2_q[2],
    )
