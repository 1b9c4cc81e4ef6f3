"""Statistical functionals of paths: weighted quadratic variation,
1/H-variation, Holder-regularity estimation, power-law fitting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special
from sklearn.base import BaseEstimator

from ._validation import DegeneratePathError, check_hurst, check_paths_matrix
from .grid import BracketPath, SamplePath

__all__ = [
    "EstimateWithCI",
    "PowerLawFit",
    "gaussian_abs_moment",
    "weighted_qv",
    "weighted_qv_tail",
    "p_variation",
    "holder_exponent_estimate",
    "powerlaw_fit",
    "HolderExponentEstimator",
]

DEFAULT_CI_MULTIPLIER = 3.0


@dataclass(frozen=True)
class EstimateWithCI:
    """Scalar estimate with standard error and sample count."""

    value: float
    std_error: float
    n_samples: int

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError(f"estimate must be finite, got {self.value}")
        if not np.isfinite(self.std_error) or self.std_error < 0:
            raise ValueError(f"std_error must be finite and >= 0, got {self.std_error}")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")

    def half_width(self, z: float = DEFAULT_CI_MULTIPLIER) -> float:
        return z * self.std_error

    def interval(self, z: float = DEFAULT_CI_MULTIPLIER) -> tuple:
        return (self.value - z * self.std_error, self.value + z * self.std_error)

    def covers(self, target: float, z: float = DEFAULT_CI_MULTIPLIER) -> bool:
        return abs(self.value - target) <= z * self.std_error


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares fit of values ~ coefficient * t^exponent on a log-log scale."""

    coefficient: float
    exponent: float
    residual: float

    def __post_init__(self):
        if self.coefficient <= 0:
            raise ValueError("power-law coefficient must be positive")
        if self.residual < 0:
            raise ValueError("residual must be >= 0")


def gaussian_abs_moment(q: float) -> float:
    """E|Z|^q = 2^{q/2} Gamma((q+1)/2) / sqrt(pi) for standard normal Z."""
    if q <= -1:
        raise ValueError("absolute moment defined for q > -1")
    return 2.0 ** (q / 2.0) * special.gamma((q + 1.0) / 2.0) / np.sqrt(np.pi)


def weighted_qv(path: SamplePath, hurst) -> float:
    """n^{2H-1} sum of squared increments over the whole grid."""
    h = check_hurst(hurst)
    n = path.grid.n_steps
    if n < 1:
        raise ValueError("weighted_qv needs at least one step")
    inc = path.increments()
    return float(n ** (2 * h - 1.0) * np.dot(inc, inc))


def weighted_qv_tail(path: SamplePath, hurst, s: float) -> float:
    """n^{2H-1} sum of squared increments over grid cells after time s.

    s must be a grid point (n*s/horizon integral), mirroring the subsequence
    on which the tail limit is stated; off-grid splits are rejected with
    guidance to adjust n.
    """
    h = check_hurst(hurst)
    n = path.grid.n_steps
    if n < 1:
        raise ValueError("weighted_qv_tail needs at least one step")
    if not 0 <= s < path.grid.horizon:
        raise ValueError(f"split s must lie in [0, horizon), got {s}")
    k0 = path.grid.index_of(s)
    inc = path.increments()[k0:]
    return float(n ** (2 * h - 1.0) * np.dot(inc, inc))


def p_variation(path: SamplePath, hurst) -> float:
    """sum |increment|^{1/H}; H = 1/2 reduces to the unweighted quadratic variation."""
    h = check_hurst(hurst)
    if path.grid.n_steps < 1:
        raise ValueError("p_variation needs at least one step")
    return float(np.sum(np.abs(path.increments()) ** (1.0 / h)))


def _dyadic_scales(n: int):
    m = 1
    while m <= n // 16:
        yield m
        m *= 2


def holder_exponent_estimate(path: SamplePath) -> EstimateWithCI:
    """Holder-regularity proxy from first-absolute-moment dyadic scaling.

    Regresses log E_k |X_{t+m*dt} - X_t| on log(m*dt) over dyadic coarsenings
    m = 1, 2, 4, ..., n/16 and clamps the slope to [0, 1].  The standard error
    comes from the regression residuals; a constant path has no defined
    estimate and raises :class:`DegeneratePathError`.
    """
    n = path.grid.n_steps
    if n < 64:
        raise ValueError(f"holder_exponent_estimate needs n >= 64, got {n}")
    values = path.values
    if np.ptp(values) == 0.0:
        raise DegeneratePathError("constant path: Holder estimate undefined")
    scales, means = [], []
    for m in _dyadic_scales(n):
        mean_abs = np.abs(np.diff(values[::m])).mean()
        if mean_abs == 0.0:
            raise DegeneratePathError(
                f"path constant at coarsening {m}: Holder estimate undefined"
            )
        scales.append(m * path.grid.spacing)
        means.append(mean_abs)
    x = np.log(scales)
    y = np.log(means)
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    dof = max(len(x) - 2, 1)
    sigma2 = np.sum((y - fitted) ** 2) / dof
    se = float(np.sqrt(sigma2 / np.sum((x - x.mean()) ** 2)))
    return EstimateWithCI(float(min(max(slope, 0.0), 1.0)), se, len(x))


def powerlaw_fit(bracket: BracketPath, t_min: float, t_max: float) -> PowerLawFit:
    """Fit log(values) against log(t) over grid points with t_min <= t <= t_max."""
    if not 0 < t_min < t_max:
        raise ValueError("need 0 < t_min < t_max")
    t = bracket.grid.points
    mask = (t >= t_min) & (t <= t_max)
    t_sel = t[mask]
    v_sel = bracket.values[mask]
    if t_sel.size < 2:
        raise ValueError("fewer than two grid points in the fit range")
    if np.any(v_sel <= 0):
        raise ValueError(
            f"bracket must be strictly positive on [{t_min}, {t_max}] for a log-log fit"
        )
    x = np.log(t_sel)
    y = np.log(v_sel)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return PowerLawFit(float(np.exp(intercept)), float(slope),
                       float(np.sqrt(np.mean(resid ** 2))))


class HolderExponentEstimator(BaseEstimator):
    """Per-path Holder-exponent estimates for stacked paths (n_paths, n+1).

    After ``fit``:

    estimates_ : ndarray of per-path estimates (NaN where undefined)
    median_ : median of the defined estimates
    """

    def __init__(self, horizon=1.0):
        self.horizon = horizon

    def fit(self, X, y=None):
        from .grid import TimeGrid

        X = check_paths_matrix(X, min_columns=65)
        grid = TimeGrid(self.horizon, X.shape[1] - 1)
        est = np.full(X.shape[0], np.nan)
        for i, row in enumerate(X):
            try:
                est[i] = holder_exponent_estimate(SamplePath(grid, row, "other")).value
            except DegeneratePathError:
                pass
        if np.isnan(est).all():
            raise DegeneratePathError("every path is degenerate")
        self.estimates_ = est
        self.median_ = float(np.nanmedian(est))
        return self
