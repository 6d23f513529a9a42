"""Chain containers, posterior summaries, and effective sample size."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class McmcConfig:
    """Run-length and adaptation settings for one chain.

    Draws are stored at iterations burn_in + thin, burn_in + 2*thin, ...,
    n_iterations, so (n_iterations - burn_in) must be divisible by thin.
    ``latent_stride`` controls which latent sites are stored (every k-th
    plus the final one); ``store_latent=False`` drops them entirely.
    """

    n_iterations: int
    burn_in: int
    thin: int = 1
    rng_seed: int = 0
    target_accept_scalar: float = 0.44
    target_accept_block: float = 0.234
    adapt_interval: int = 200
    latent_stride: int = 10
    store_latent: bool = True
    progress_every: int = 0

    def __post_init__(self):
        if self.n_iterations < 1:
            raise ValueError("n_iterations must be positive")
        if not (0 <= self.burn_in < self.n_iterations):
            raise ValueError("burn_in must satisfy 0 <= burn_in < n_iterations")
        if self.thin < 1:
            raise ValueError("thin must be at least 1")
        if (self.n_iterations - self.burn_in) % self.thin != 0:
            raise ValueError("(n_iterations - burn_in) must be divisible by thin")
        if not (0.0 < self.target_accept_scalar < 1.0):
            raise ValueError("target_accept_scalar must lie in (0, 1)")
        if not (0.0 < self.target_accept_block < 1.0):
            raise ValueError("target_accept_block must lie in (0, 1)")
        if self.adapt_interval < 1:
            raise ValueError("adapt_interval must be at least 1")
        if self.latent_stride < 1:
            raise ValueError("latent_stride must be at least 1")
        if self.progress_every < 0:
            raise ValueError("progress_every must be nonnegative")

    @property
    def n_draws(self) -> int:
        return (self.n_iterations - self.burn_in) // self.thin


@dataclass(frozen=True)
class McmcChain:
    """Stored draws (rows) for named quantities (columns).

    Latent-state columns are named h_<site> (univariate) or
    h<asset>_<site> (multivariate) alongside the model parameters.
    """

    names: tuple[str, ...]
    draws: np.ndarray
    acceptance_rates: dict[str, float] = field(default_factory=dict)
    config: McmcConfig | None = None

    def __post_init__(self):
        names = tuple(self.names)
        draws = np.asarray(self.draws, dtype=float)
        if draws.ndim != 2:
            raise ValueError("draws must be a (n_draws, n_names) matrix")
        if draws.shape[1] != len(names):
            raise ValueError("one column per name is required")
        if len(set(names)) != len(names):
            raise ValueError("chain names must be unique")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "draws", draws)
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    @property
    def n_draws(self) -> int:
        return self.draws.shape[0]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.draws[:, self._index[name]]
        except KeyError:
            raise KeyError(f"no chain column named {name!r}") from None

    def parameter_names(self) -> list[str]:
        """Names excluding latent-state columns."""
        return [n for n in self.names if not n.startswith("h")]


@dataclass(frozen=True)
class ParameterSummary:
    mean: float
    sd: float
    quantiles: dict[float, float]
    ess: float


@dataclass(frozen=True)
class PosteriorSummary:
    """Per-parameter posterior statistics, in chain column order."""

    parameters: dict[str, ParameterSummary]

    def __getitem__(self, name: str) -> ParameterSummary:
        return self.parameters[name]

    def __contains__(self, name: str) -> bool:
        return name in self.parameters

    @property
    def names(self) -> list[str]:
        return list(self.parameters)


def _next_pow_two(n: int) -> int:
    m = 1
    while m < n:
        m <<= 1
    return m


def effective_sample_size(x) -> float:
    """ESS via Geyer's initial monotone sequence estimator.

    Autocovariances are computed by FFT; consecutive-lag pairs are summed,
    truncated at the first nonpositive pair, and forced nonincreasing
    before forming the integrated autocorrelation time.
    """
    arr = np.asarray(x, dtype=float)
    n = arr.size
    if n < 4:
        return float(n)
    centered = arr - arr.mean()
    if not np.any(centered):
        return float(n)
    m = _next_pow_two(2 * n)
    spec = np.fft.rfft(centered, m)
    acov = np.fft.irfft(spec * np.conj(spec), m)[:n].real / n
    rho = acov / acov[0]
    pair_sums = []
    k = 0
    while 2 * k + 1 < n:
        s = rho[2 * k] + rho[2 * k + 1]
        if s <= 0.0:
            break
        pair_sums.append(s)
        k += 1
    if not pair_sums:
        return float(n)
    pair_sums = np.minimum.accumulate(pair_sums)
    iact = max(1.0, 2.0 * float(np.sum(pair_sums)) - 1.0)
    return float(min(n, n / iact))


def summarize(chain: McmcChain, probs=(0.025, 0.975)) -> PosteriorSummary:
    """Mean, sd, interpolated quantiles, and ESS for every chain column."""
    if chain.n_draws < 1:
        raise ValueError("cannot summarize an empty chain")
    probs = tuple(float(q) for q in probs)
    if any(not (0.0 <= q <= 1.0) for q in probs):
        raise ValueError("quantile probabilities must lie in [0, 1]")
    out: dict[str, ParameterSummary] = {}
    for name in chain.names:
        col = chain.column(name)
        sd = float(np.std(col, ddof=1)) if col.size > 1 else 0.0
        qs = np.quantile(col, probs, method="linear") if probs else np.array([])
        out[name] = ParameterSummary(
            mean=float(col.mean()),
            sd=sd,
            quantiles={q: float(v) for q, v in zip(probs, qs)},
            ess=effective_sample_size(col),
        )
    return PosteriorSummary(out)
