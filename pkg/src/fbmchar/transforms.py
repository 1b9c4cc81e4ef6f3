"""Pathwise Riemann-Stieltjes integration and the process transforms.

The chain and its inverses::

    X --(s^{1/2-H} dX)--> Y
    X --(s^{1/2-H}(t-s)^{1/2-H} dX)--> M      (fundamental martingale)
    M --(s^{H-1/2} dM)--> W
    M --(abel_c (t-s)^{H-1/2} dM)--> Y        (Abel inversion)
    M --(repxm kernel)--> X                   (H > 1/2)
    W --(abel_c * z kernel)--> X              (H < 1/2)

Evaluation nodes are cell midpoints s_j* = (t_{j-1}+t_j)/2 everywhere, so the
singular weights are only ever evaluated strictly inside cells.  Per-time
transforms assemble the lower-triangular kernel matrix row-block by row-block
(O(n^2) kernel values, cached per row chunk) and apply it to increments, so a
whole ensemble costs one matrix build plus one GEMM.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_hurst, check_paths_matrix, is_near_half
from .grid import BracketPath, SamplePath, TimeGrid
from .kernels import (
    DEFAULT_NODES,
    LOG_RATIO_SWITCH,
    abel_const,
    beta_b1,
    gauss_jacobi_rule,
)

__all__ = [
    "rs_integrate",
    "y_process",
    "x_from_y",
    "fundamental_martingale",
    "fundamental_martingale_via_y",
    "w_process",
    "y_from_m_abel",
    "x_from_m_high",
    "x_from_w_low",
    "empirical_bracket",
    "molchan_weight_matrix",
    "repxm_weight_matrix",
    "z_weight_matrix",
    "ProcessTransform",
]

_CHUNK_ELEMS = 6_000_000  # scratch budget for kernel-matrix assembly


def _exponent(value: float, h: float) -> float:
    """Kernel exponent, snapped to the exact degenerate value near H = 1/2."""
    return 0.0 if is_near_half(h) else value


def _require_role(path: SamplePath, role: str, op: str):
    if path.role != role:
        raise ValueError(f"{op} expects a path with role {role!r}, got {path.role!r}")


def rs_integrate(weight, path: SamplePath, scheme: str = "midpoint") -> SamplePath:
    """Cumulative pathwise Riemann-Stieltjes sums sum_j w(s_j*) (P_{j+1} - P_j).

    ``weight`` is a function of time evaluated at the scheme's nodes (cell
    midpoints or left endpoints); it must be finite at every node.  The result
    is linear both in the weight and in the integrator path.
    """
    if scheme not in ("midpoint", "left"):
        raise ValueError(f"scheme must be 'midpoint' or 'left', got {scheme!r}")
    grid = path.grid
    nodes = grid.midpoints if scheme == "midpoint" else grid.points[:-1]
    w = np.asarray(weight(nodes), dtype=float)
    w = np.broadcast_to(w, nodes.shape)
    bad = ~np.isfinite(w)
    if bad.any():
        where = nodes[bad][0]
        raise ValueError(f"integrand is non-finite at node t={where}")
    out = np.zeros(grid.n_steps + 1)
    np.cumsum(w * path.increments(), out=out[1:])
    return SamplePath(grid, out, "other")


def _apply_lower(matrix: np.ndarray, increments: np.ndarray) -> np.ndarray:
    """Map increment rows through a lower-triangular kernel matrix."""
    out = np.zeros((increments.shape[0], increments.shape[1] + 1))
    out[:, 1:] = increments @ matrix.T
    return out


def _weight_matrix(grid: TimeGrid, left_exp: float, diff_exp: float) -> np.ndarray:
    """Lower-triangular K[m-1, j-1] = s_j*^{left_exp} (t_m - s_j*)^{diff_exp}."""
    n = grid.n_steps
    tk = grid.points
    mid = grid.midpoints
    K = np.zeros((n, n))
    chunk = max(1, _CHUNK_ELEMS // max(n, 1))
    mid_pow = mid ** left_exp if left_exp != 0.0 else np.ones(n)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        diff = tk[lo + 1:hi + 1][:, None] - mid[None, :hi]
        valid = diff > 0
        blk = np.where(valid, diff, 1.0) ** diff_exp if diff_exp != 0.0 else \
            np.ones_like(diff)
        blk *= mid_pow[None, :hi]
        blk[~valid] = 0.0
        K[lo:hi, :hi] = blk
    return K


def molchan_weight_matrix(grid: TimeGrid, hurst) -> np.ndarray:
    """Kernel matrix of the fundamental-martingale transform on the grid."""
    h = check_hurst(hurst)
    e = _exponent(0.5 - h, h)
    return _weight_matrix(grid, e, e)


def repxm_weight_matrix(grid: TimeGrid, hurst, nodes=DEFAULT_NODES) -> np.ndarray:
    """Kernel matrix of the H > 1/2 inverse representation (midpoint nodes).

    Entries are the singular integrals (1/B1) int_{u_j*}^{t_m} s^{H-1/2}
    (s-u)^{H-3/2} ds, evaluated by the same hybrid Gauss-Jacobi scheme as
    :func:`fbmchar.kernels.repxm_kernel`, in row blocks sized to reuse one
    scratch buffer.
    """
    h = check_hurst(hurst)
    if h <= 0.5:
        raise ValueError(f"inverse-from-martingale kernel requires H > 1/2, got {h}")
    n = grid.n_steps
    if is_near_half(h):
        return np.tril(np.ones((n, n)))
    a = h - 0.5
    b1 = beta_b1(h)
    x, w = gauss_jacobi_rule(nodes, a - 1.0)
    xp = x + 1.0
    tk = grid.points
    mid = grid.midpoints
    K = np.zeros((n, n))
    chunk = max(1, _CHUNK_ELEMS // max(n * nodes, 1))
    buf = np.empty((chunk, n, nodes))
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        c = hi - lo
        tm = tk[lo + 1:hi + 1][:, None]
        um = mid[None, :hi]
        half = 0.5 * (tm - um)
        valid = half > 0
        hs = np.where(valid, half, 1.0)
        s = buf[:c, :hi, :]
        np.multiply(hs[..., None], xp, out=s)
        s += um[..., None]
        np.power(s, a, out=s)
        blk = hs ** a
        blk *= s @ w
        small = valid & (um < LOG_RATIO_SWITCH * tm)
        if small.any():
            uu = np.broadcast_to(um, half.shape)[small]
            tt = np.broadcast_to(tm, half.shape)[small]
            half_l = 0.5 * np.log(tt / uu)
            sig = half_l[:, None] * xp
            g = np.exp((a + 1.0) * sig) * (np.expm1(sig) / sig) ** (a - 1.0)
            blk[small] = uu ** (2 * a) * half_l ** a * (g @ w)
        blk[~valid] = 0.0
        K[lo:hi, :hi] = blk
        K[lo:hi] /= b1
    return K


def z_weight_matrix(grid: TimeGrid, hurst, nodes=DEFAULT_NODES) -> np.ndarray:
    """Kernel matrix of the H < 1/2 inverse representation (midpoint nodes).

    Entries are abel_const(H) * z(t_m, s_j*); the reciprocal-gamma factor
    normalizes the representation so that the W -> X map inverts the forward
    chain (checked against deterministic closed forms in the tests).
    """
    h = check_hurst(hurst)
    if h >= 0.5:
        raise ValueError(f"inverse-from-W kernel requires H < 1/2, got {h}")
    n = grid.n_steps
    if is_near_half(h):
        return np.tril(np.ones((n, n)))
    b = h - 0.5
    const = abel_const(h)
    x, w = gauss_jacobi_rule(nodes, b)
    xp = x + 1.0
    tk = grid.points
    mid = grid.midpoints
    K = np.zeros((n, n))
    chunk = max(1, _CHUNK_ELEMS // max(n * nodes, 1))
    buf = np.empty((chunk, n, nodes))
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        c = hi - lo
        tm = tk[lo + 1:hi + 1][:, None]
        sm = mid[None, :hi]
        half = 0.5 * (tm - sm)
        valid = half > 0
        hs = np.where(valid, half, 1.0)
        u = buf[:c, :hi, :]
        np.multiply(hs[..., None], xp, out=u)
        u += sm[..., None]
        np.power(u, h - 1.5, out=u)
        corr = hs ** (b + 1.0)
        corr *= u @ w
        small = valid & (sm < LOG_RATIO_SWITCH * tm)
        if small.any():
            ss = np.broadcast_to(sm, half.shape)[small]
            tt = np.broadcast_to(tm, half.shape)[small]
            half_l = 0.5 * np.log(tt / ss)
            sig = half_l[:, None] * xp
            g = np.exp(b * sig) * (np.expm1(sig) / sig) ** b
            corr[small] = ss ** (2 * h - 1.0) * half_l ** (b + 1.0) * (g @ w)
        first = (sm / tm) ** (-b) * np.where(valid, 2.0 * hs, 1.0) ** b
        blk = first - b * sm ** (-b) * corr
        blk[~valid] = 0.0
        K[lo:hi, :hi] = blk
        K[lo:hi] *= const
    return K


def y_process(path: SamplePath, hurst) -> SamplePath:
    """Y_t = int_0^t s^{1/2-H} dX_s (midpoint nodes keep the weight finite)."""
    h = check_hurst(hurst)
    _require_role(path, "X", "y_process")
    e = _exponent(0.5 - h, h)
    out = rs_integrate(lambda s: s ** e, path)
    return out.with_role("Y")


def x_from_y(path: SamplePath, hurst) -> SamplePath:
    """Inverse of :func:`y_process`: X_t = int_0^t s^{H-1/2} dY_s."""
    h = check_hurst(hurst)
    _require_role(path, "Y", "x_from_y")
    e = _exponent(h - 0.5, h)
    out = rs_integrate(lambda s: s ** e, path)
    return out.with_role("X")


def fundamental_martingale(path: SamplePath, hurst) -> SamplePath:
    """M_{t_m} = sum_{j<=m} s_j*^{1/2-H} (t_m - s_j*)^{1/2-H} (X_j - X_{j-1})."""
    h = check_hurst(hurst)
    _require_role(path, "X", "fundamental_martingale")
    K = molchan_weight_matrix(path.grid, h)
    values = _apply_lower(K, path.increments()[None, :])[0]
    return SamplePath(path.grid, values, "M")


def fundamental_martingale_via_y(path: SamplePath, hurst) -> SamplePath:
    """Cross-check route: M_{t_m} = sum_{j<=m} (t_m - s_j*)^{1/2-H} (Y_j - Y_{j-1})."""
    h = check_hurst(hurst)
    _require_role(path, "X", "fundamental_martingale_via_y")
    y = y_process(path, h)
    K = _weight_matrix(path.grid, 0.0, _exponent(0.5 - h, h))
    values = _apply_lower(K, y.increments()[None, :])[0]
    return SamplePath(path.grid, values, "M")


def w_process(path: SamplePath, hurst) -> SamplePath:
    """W_t = int_0^t s^{H-1/2} dM_s; its discrete bracket is the s^{2H-1}-weighted
    bracket of M by construction."""
    h = check_hurst(hurst)
    _require_role(path, "M", "w_process")
    e = _exponent(h - 0.5, h)
    out = rs_integrate(lambda s: s ** e, path)
    return out.with_role("W")


def y_from_m_abel(path: SamplePath, hurst) -> SamplePath:
    """Abel inversion: Y_t = abel_c(H) sum_{j<=m} (t_m - s_j*)^{H-1/2} (M_j - M_{j-1})."""
    h = check_hurst(hurst)
    _require_role(path, "M", "y_from_m_abel")
    if is_near_half(h):
        K = np.tril(np.ones((path.grid.n_steps,) * 2))
    else:
        K = abel_const(h) * _weight_matrix(path.grid, 0.0, h - 0.5)
    values = _apply_lower(K, path.increments()[None, :])[0]
    return SamplePath(path.grid, values, "Y")


def x_from_m_high(path: SamplePath, hurst, nodes=DEFAULT_NODES) -> SamplePath:
    """Recover X from M for H > 1/2 through the singular-kernel representation."""
    h = check_hurst(hurst)
    _require_role(path, "M", "x_from_m_high")
    K = repxm_weight_matrix(path.grid, h, nodes)
    values = _apply_lower(K, path.increments()[None, :])[0]
    return SamplePath(path.grid, values, "X")


def x_from_w_low(path: SamplePath, hurst, nodes=DEFAULT_NODES) -> SamplePath:
    """Recover X from W for H < 1/2 through the z-kernel representation."""
    h = check_hurst(hurst)
    _require_role(path, "W", "x_from_w_low")
    K = z_weight_matrix(path.grid, h, nodes)
    values = _apply_lower(K, path.increments()[None, :])[0]
    return SamplePath(path.grid, values, "X")


def empirical_bracket(path: SamplePath) -> BracketPath:
    """Cumulative sum of squared increments along the grid."""
    out = np.zeros(path.grid.n_steps + 1)
    np.cumsum(path.increments() ** 2, out=out[1:])
    return BracketPath(path.grid, out)


_KINDS = {
    "y": ("X", "Y"),
    "x-from-y": ("Y", "X"),
    "martingale": ("X", "M"),
    "martingale-via-y": ("X", "M"),
    "w": ("M", "W"),
    "y-from-m": ("M", "Y"),
    "x-from-m": ("M", "X"),
    "x-from-w": ("W", "X"),
    "bracket": ("other", "other"),
}


class ProcessTransform(BaseEstimator, TransformerMixin):
    """scikit-learn transformer over stacked paths of shape (n_paths, n+1).

    Parameters
    ----------
    kind : str
        One of 'y', 'x-from-y', 'martingale', 'martingale-via-y', 'w',
        'y-from-m', 'x-from-m', 'x-from-w', 'bracket'.
    hurst : float
        Hurst index; ignored by 'bracket'.
    horizon : float, default 1.0
        Time horizon of the shared grid (step count is inferred from the
        array width).
    nodes : int, default 64
        Quadrature nodes for the singular-kernel inverse representations.
    """

    def __init__(self, kind="martingale", hurst=0.5, horizon=1.0, nodes=DEFAULT_NODES):
        self.kind = kind
        self.hurst = hurst
        self.horizon = horizon
        self.nodes = nodes

    def fit(self, X, y=None):
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {sorted(_KINDS)}, got {self.kind!r}")
        if self.kind != "bracket":
            check_hurst(self.hurst)
        check_paths_matrix(X, min_columns=2)
        return self

    def transform(self, X):
        self.fit(X)
        X = check_paths_matrix(X, min_columns=2)
        grid = TimeGrid(self.horizon, X.shape[1] - 1)
        h = self.hurst
        inc = np.diff(X, axis=1)
        if self.kind == "bracket":
            out = np.zeros_like(X)
            np.cumsum(inc ** 2, axis=1, out=out[:, 1:])
            return out
        if self.kind in ("y", "x-from-y", "w"):
            hv = check_hurst(h)
            e = _exponent(0.5 - hv if self.kind == "y" else hv - 0.5, hv)
            out = np.zeros_like(X)
            np.cumsum(grid.midpoints[None, :] ** e * inc, axis=1, out=out[:, 1:])
            return out
        if self.kind == "martingale":
            K = molchan_weight_matrix(grid, h)
        elif self.kind == "martingale-via-y":
            hv = check_hurst(h)
            e = _exponent(0.5 - hv, hv)
            inc = grid.midpoints[None, :] ** e * inc
            K = _weight_matrix(grid, 0.0, e)
        elif self.kind == "y-from-m":
            hv = check_hurst(h)
            if is_near_half(hv):
                K = np.tril(np.ones((grid.n_steps,) * 2))
            else:
                K = abel_const(hv) * _weight_matrix(grid, 0.0, hv - 0.5)
        elif self.kind == "x-from-m":
            K = repxm_weight_matrix(grid, h, self.nodes)
        elif self.kind == "x-from-w":
            K = z_weight_matrix(grid, h, self.nodes)
        else:  # pragma: no cover
            raise AssertionError(self.kind)
        return _apply_lower(K, inc)
