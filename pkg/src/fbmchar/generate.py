"""Exact simulation of fractional Brownian motion on uniform grids.

Two exact samplers for the centered Gaussian process with covariance
``0.5 * (t^{2H} + s^{2H} - |t - s|^{2H})``:

* ``generate_cholesky`` -- O(n^3) dense factorization of the grid covariance;
  kept as an independent oracle for the fast generator.
* ``generate_davies_harte`` -- O(n log n) circulant embedding of the
  fractional-Gaussian-noise autocovariance.

Path ``i`` of an ensemble is drawn from its own counter-based Philox stream
keyed by ``(seed, i)``, so any single path can be regenerated independently.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import NumericalError, check_hurst, check_seed
from .grid import HurstIndex, PathEnsemble, SamplePath, TimeGrid

CHOLESKY_STEP_CAP = 4096
EIGENVALUE_TOLERANCE = 1e-9  # relative clamp threshold for circulant eigenvalues

__all__ = [
    "fbm_covariance",
    "fgn_autocovariance",
    "fbm_covariance_matrix",
    "circulant_eigenvalues",
    "generate_cholesky",
    "generate_davies_harte",
    "FbmGenerator",
]


def fbm_covariance(s, t, hurst):
    """Covariance of fBm at times (s, t): 0.5 (t^{2H} + s^{2H} - |t-s|^{2H}).

    Symmetric in (s, t); vectorized over array arguments.
    """
    h = check_hurst(hurst)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(t < 0):
        raise ValueError("covariance arguments must be non-negative times")
    out = 0.5 * (t ** (2 * h) + s ** (2 * h) - np.abs(t - s) ** (2 * h))
    return out if out.ndim else float(out)


def fgn_autocovariance(lag, hurst):
    """Autocovariance of unit-spaced fractional Gaussian noise at integer lags."""
    h = check_hurst(hurst)
    k = np.asarray(lag, dtype=float)
    if np.any(k < 0):
        raise ValueError("lag must be non-negative")
    out = 0.5 * (
        np.abs(k + 1) ** (2 * h) - 2 * np.abs(k) ** (2 * h) + np.abs(k - 1) ** (2 * h)
    )
    return out if out.ndim else float(out)


def fbm_covariance_matrix(grid: TimeGrid, hurst) -> np.ndarray:
    """Dense covariance matrix of (X_{t_1}, ..., X_{t_n}) on the grid."""
    tk = grid.points[1:]
    return fbm_covariance(tk[:, None], tk[None, :], hurst)


def _path_rng(seed: int, index: int) -> np.random.Generator:
    # 128-bit Philox key = (seed << 64) | index: counter-based, per-path stream.
    return np.random.Generator(np.random.Philox(key=(seed << 64) + index))


def _ensemble(grid, matrix, hurst, seed) -> PathEnsemble:
    paths = tuple(SamplePath(grid, row, "X") for row in matrix)
    return PathEnsemble(grid, paths, HurstIndex(hurst), seed)


def generate_cholesky(grid: TimeGrid, hurst, seed: int, n_paths: int,
                      *, step_cap: int = CHOLESKY_STEP_CAP) -> PathEnsemble:
    """Exact fBm ensemble via Cholesky factorization of the grid covariance.

    O(n^3) in the step count; refuses grids beyond ``step_cap``.
    """
    h = check_hurst(hurst)
    seed = check_seed(seed)
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    n = grid.n_steps
    if n > step_cap:
        raise ValueError(
            f"grid has n_steps={n} > cap {step_cap}; "
            "the O(n^3) factorization is limited, use generate_davies_harte"
        )
    if n == 0:
        return _ensemble(grid, np.zeros((n_paths, 1)), h, seed)
    cov = fbm_covariance_matrix(grid, h)
    try:
        lower = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"fBm covariance factorization failed for H={h}, n={n}: {exc}"
        ) from exc
    out = np.zeros((n_paths, n + 1))
    # per-path matvec (not one batched GEMM) so path i depends only on (seed, i)
    for i in range(n_paths):
        out[i, 1:] = lower @ _path_rng(seed, i).standard_normal(n)
    return _ensemble(grid, out, h, seed)


def _embedding_size(n: int) -> int:
    m = 1
    while m < 2 * n:
        m *= 2
    return m


def circulant_eigenvalues(n: int, hurst) -> np.ndarray:
    """Eigenvalues of the circulant embedding used by the Davies-Harte sampler.

    The embedding has size m = first power of two >= 2n; eigenvalues are the
    real FFT of the symmetrized autocovariance row.
    """
    h = check_hurst(hurst)
    if n < 1:
        raise ValueError("n must be >= 1")
    m = _embedding_size(n)
    gamma = fgn_autocovariance(np.arange(m // 2 + 1), h)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    return np.fft.fft(row).real


def generate_davies_harte(grid: TimeGrid, hurst, seed: int, n_paths: int) -> PathEnsemble:
    """Exact fBm ensemble via circulant embedding (Davies-Harte), O(n log n) per path.

    Negative circulant eigenvalues below ``-EIGENVALUE_TOLERANCE * max`` abort
    with :class:`NumericalError`; anything closer to zero is clamped.
    """
    h = check_hurst(hurst)
    seed = check_seed(seed)
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    n = grid.n_steps
    if n < 1:
        raise ValueError("generate_davies_harte needs n_steps >= 1")
    lam = circulant_eigenvalues(n, h)
    lam_max = lam.max()
    if lam.min() < -EIGENVALUE_TOLERANCE * lam_max:
        raise NumericalError(
            f"circulant embedding produced eigenvalue {lam.min():.3e} below "
            f"tolerance -{EIGENVALUE_TOLERANCE:.0e} * max ({lam_max:.3e}) "
            f"for H={h}, n={n}"
        )
    lam = np.clip(lam, 0.0, None)
    m = lam.size
    half = m // 2
    scale_full = np.sqrt(lam)
    scale_pair = np.sqrt(lam / 2.0)
    step_scale = (grid.horizon / n) ** h
    out = np.zeros((n_paths, n + 1))
    spectrum = np.empty(m, dtype=complex)
    for i in range(n_paths):
        z = _path_rng(seed, i).standard_normal(m)
        spectrum[0] = scale_full[0] * z[0]
        spectrum[half] = scale_full[half] * z[1]
        spectrum[1:half] = scale_pair[1:half] * (z[2::2] + 1j * z[3::2])
        spectrum[half + 1:] = np.conj(spectrum[1:half][::-1])
        fgn = np.fft.fft(spectrum).real[:n] / np.sqrt(m)
        np.cumsum(fgn * step_scale, out=out[i, 1:])
    return _ensemble(grid, out, h, seed)


_GENERATORS = {
    "cholesky": generate_cholesky,
    "davies-harte": generate_davies_harte,
}


class FbmGenerator(BaseEstimator):
    """Sampler with scikit-learn parameter semantics.

    Parameters
    ----------
    hurst : float
        Self-similarity index in (0, 1).
    horizon : float, default 1.0
        Time horizon t; the grid is t*k/n_steps.
    n_steps : int, default 4096
        Number of grid steps.
    method : {"davies-harte", "cholesky"}, default "davies-harte"
    seed : int, default 42
        Ensemble seed; path i is reproducible from (seed, i).
    """

    def __init__(self, hurst=0.5, horizon=1.0, n_steps=4096,
                 method="davies-harte", seed=42):
        self.hurst = hurst
        self.horizon = horizon
        self.n_steps = n_steps
        self.method = method
        self.seed = seed

    def fit(self, X=None, y=None):
        check_hurst(self.hurst)
        if self.method not in _GENERATORS:
            raise ValueError(f"method must be one of {sorted(_GENERATORS)}")
        return self

    def sample_ensemble(self, n_paths: int) -> PathEnsemble:
        self.fit()
        grid = TimeGrid(self.horizon, self.n_steps)
        return _GENERATORS[self.method](grid, self.hurst, self.seed, n_paths)

    def sample(self, n_paths: int) -> np.ndarray:
        """Draw paths as an (n_paths, n_steps + 1) array."""
        return self.sample_ensemble(n_paths).to_matrix()
