"""Core types and gap-time utilities for irregularly spaced series.

An irregularly spaced series is a set of observations at strictly
increasing times t_1 < ... < t_T.  The gap times g_j = t_j - t_{j-1}
(j >= 2) drive every model in this package: persistence parameters get
raised to the power g_j, so gap times are usually rescaled into (0, 1]
to keep those powers bounded away from zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TIME_TOL = 1e-9  # absolute tolerance for timestamp arithmetic


def _as_1d_floats(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TickSeries:
    """Trade ticks of one asset: strictly increasing times, positive prices.

    Timestamps are fractional seconds since an arbitrary epoch; equality is
    only meaningful to within ``TIME_TOL``.
    """

    asset_id: str
    timestamps: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        ts = _as_1d_floats(self.timestamps, "timestamps")
        px = _as_1d_floats(self.prices, "prices")
        if ts.size != px.size:
            raise ValueError("timestamps and prices must have equal length")
        if ts.size < 1:
            raise ValueError("a tick series needs at least one observation")
        if np.any(np.diff(ts) <= 0):
            raise ValueError(
                f"timestamps of {self.asset_id!r} must be strictly increasing"
            )
        if np.any(px <= 0):
            raise ValueError(f"prices of {self.asset_id!r} must be positive")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "prices", px)

    def __len__(self) -> int:
        return self.timestamps.size


@dataclass(frozen=True)
class GapSeries:
    """One irregularly spaced series: observation times, values, gap times.

    ``gaps[j-1]`` is the time elapsed between observations j and j+1
    (zero-based), i.e. there are ``len(values) - 1`` gaps.  When ``gaps``
    is omitted it is derived from the timestamps; when supplied it must be
    consistent with them to within ``TIME_TOL``.
    """

    timestamps: np.ndarray
    values: np.ndarray
    gaps: np.ndarray | None = None

    def __post_init__(self):
        ts = _as_1d_floats(self.timestamps, "timestamps")
        vals = _as_1d_floats(self.values, "values")
        if ts.size != vals.size:
            raise ValueError("timestamps and values must have equal length")
        if ts.size < 1:
            raise ValueError("a gap series needs at least one observation")
        derived = np.diff(ts)
        if np.any(derived <= 0):
            raise ValueError("timestamps must be strictly increasing")
        if self.gaps is None:
            gaps = derived
        else:
            gaps = _as_1d_floats(self.gaps, "gaps")
            if gaps.size != ts.size - 1:
                raise ValueError("need exactly one gap per consecutive pair")
            if np.any(gaps <= 0):
                raise ValueError("gap times must be positive")
            if gaps.size and float(np.max(np.abs(gaps - derived))) > TIME_TOL:
                raise ValueError("gaps are inconsistent with timestamps")
        gaps = gaps.copy()
        gaps.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "gaps", gaps)

    @classmethod
    def from_gaps(cls, values, gaps, start_time: float = 0.0) -> "GapSeries":
        """Build a series from values and gap times, synthesizing timestamps."""
        g = _as_1d_floats(gaps, "gaps")
        ts = start_time + np.concatenate(([0.0], np.cumsum(g)))
        return cls(ts, values, g)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class ScaledGaps:
    """Gap times rescaled into (0, 1], with the divisor retained.

    ``scale_factor`` is the divisor that was applied, so
    ``gaps * scale_factor`` recovers the original time units.
    """

    gaps: np.ndarray
    scale_factor: float

    def __post_init__(self):
        g = _as_1d_floats(self.gaps, "gaps")
        if g.size == 0:
            raise ValueError("scaled gaps cannot be empty")
        if np.any(g <= 0) or np.any(g > 1.0):
            raise ValueError("scaled gaps must lie in (0, 1]")
        if not np.isfinite(self.scale_factor) or self.scale_factor <= 0:
            raise ValueError("scale_factor must be a positive real")
        object.__setattr__(self, "gaps", g)
        object.__setattr__(self, "scale_factor", float(self.scale_factor))

    def __len__(self) -> int:
        return self.gaps.size


def compute_gaps(timestamps) -> np.ndarray:
    """Gap times between consecutive observations.

    Returns ``t[1:] - t[:-1]``; duplicate timestamps (zero gaps) and
    out-of-order timestamps are rejected separately so callers can tell
    the two data problems apart.
    """
    ts = _as_1d_floats(timestamps, "timestamps")
    if ts.size < 2:
        raise ValueError("need at least two timestamps to form gaps")
    gaps = np.diff(ts)
    if np.any(gaps == 0):
        idx = int(np.argmax(gaps == 0))
        raise ValueError(f"duplicate timestamp at index {idx + 1} gives a zero gap")
    if np.any(gaps < 0):
        idx = int(np.argmax(gaps < 0))
        raise ValueError(f"timestamps must be strictly increasing (violated at index {idx + 1})")
    return gaps


def scale_gaps(gaps) -> ScaledGaps:
    """Divide gap times by their maximum so they lie in (0, 1].

    Idempotent: gaps whose maximum is already 1 come back unchanged with a
    scale factor of 1.
    """
    g = np.asarray(gaps, dtype=float)
    if g.ndim != 1:
        raise ValueError("gaps must be one-dimensional")
    if g.size == 0:
        raise ValueError("cannot scale an empty gap sequence")
    if not np.all(np.isfinite(g)) or np.any(g <= 0):
        raise ValueError("gap times must be positive and finite")
    m = float(np.max(g))
    return ScaledGaps(g / m, m)


def log_returns(prices) -> np.ndarray:
    """Log price differences: log(P_j) - log(P_{j-1})."""
    px = _as_1d_floats(prices, "prices")
    if px.size < 2:
        raise ValueError("need at least two prices to form returns")
    if np.any(px <= 0):
        raise ValueError("prices must be positive")
    return np.diff(np.log(px))


def draw_positive_poisson(count: int, mean: float = 3.0, seed=None) -> np.ndarray:
    """Zero-truncated Poisson draws: Poisson(mean) conditioned on being > 0.

    Zeros are rejected and redrawn, which preserves the zero-truncated
    distribution exactly.  Deterministic for a fixed seed.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if not np.isfinite(mean) or mean <= 0:
        raise ValueError("mean must be a positive real")
    rng = np.random.default_rng(seed)
    out = rng.poisson(mean, size=count).astype(float)
    mask = out == 0
    while mask.any():
        out[mask] = rng.poisson(mean, size=int(mask.sum()))
        mask = out == 0
    return out


def generate_gaps(count: int, mean: float = 3.0, seed=None) -> ScaledGaps:
    """Draw zero-truncated Poisson gap times and rescale them into (0, 1]."""
    return scale_gaps(draw_positive_poisson(count, mean, seed))


def gap_values(gaps, count: int | None = None, max_one: bool = False) -> np.ndarray:
    """Coerce ``ScaledGaps`` or an array-like into a validated gap array.

    With ``count`` the first ``count`` entries are returned (erroring when
    fewer are available); ``max_one`` additionally requires gaps in (0, 1].
    """
    if isinstance(gaps, ScaledGaps):
        g = gaps.gaps
    else:
        g = _as_1d_floats(gaps, "gaps")
        if np.any(g <= 0):
            raise ValueError("gap times must be positive")
    if max_one and np.any(g > 1.0):
        raise ValueError("gaps must lie in (0, 1]; rescale them first")
    if count is not None:
        if count < 0:
            raise ValueError("count must be nonnegative")
        if g.size < count:
            raise ValueError(f"need {count} gap values but only {g.size} are available")
        g = g[:count]
    return g
