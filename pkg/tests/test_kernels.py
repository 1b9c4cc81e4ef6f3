"""Kernel tests: closed-form values, adaptive-quadrature oracles for the
singular integrals, the deterministic cell-kernel bounds, and quadrature
convergence."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from fbmchar import (
    KernelConstants,
    PartitionContext,
    TimeGrid,
    abel_const,
    beta_b1,
    molchan_kernel,
    partition_kernel_f,
    partition_kernel_g_p,
    repxm_kernel,
    z_kernel,
)

# frozen with mpmath at 30 digits
ABEL_075 = 0.90031631615710607
SQRT2_OVER_PI = 0.450158158078553035
PI_SQRT2 = 4.44288293815836625
B1_09 = 3.30326599919412411


def quad_touching(lo, hi, outer, sing):
    """Adaptive oracle for int_lo^hi u^outer (u - lo)^sing du."""
    val, err = integrate.quad(
        lambda u: u ** outer, lo, hi, weight="alg", wvar=(sing, 0.0),
        epsabs=1e-13, epsrel=1e-13, limit=200,
    )
    return val


class TestMolchanKernel:
    def test_half_is_one(self):
        assert molchan_kernel(1.0, 0.5, 0.5) == 1.0

    def test_low_hurst(self):
        assert molchan_kernel(1.0, 0.5, 0.25) == pytest.approx(2 ** -0.5, rel=1e-12)

    def test_high_hurst(self):
        assert molchan_kernel(1.0, 0.5, 0.75) == pytest.approx(2 ** 0.5, rel=1e-12)

    @given(
        t=st.floats(0.1, 10),
        frac=st.floats(1e-6, 1.0 - 1e-6),
    )
    @settings(max_examples=200, deadline=None)
    def test_identity_at_half_everywhere(self, t, frac):
        assert molchan_kernel(t, frac * t, 0.5) == 1.0

    def test_domain(self):
        with pytest.raises(ValueError):
            molchan_kernel(1.0, 0.0, 0.3)
        with pytest.raises(ValueError):
            molchan_kernel(1.0, 1.0, 0.3)


class TestConstants:
    def test_b1_reflection_075(self):
        assert beta_b1(0.75) == pytest.approx(PI_SQRT2, rel=1e-14)

    def test_b1_reflection_09(self):
        assert beta_b1(0.9) == pytest.approx(B1_09, rel=1e-13)

    def test_b1_rejects_half(self):
        with pytest.raises(ValueError):
            beta_b1(0.5)

    def test_abel_at_half(self):
        assert abel_const(0.5) == pytest.approx(1.0, abs=1e-15)

    def test_abel_symmetry(self):
        assert abel_const(0.3) == abel_const(0.7)

    def test_abel_075_value(self):
        assert abel_const(0.75) == pytest.approx(ABEL_075, rel=1e-13)

    @pytest.mark.parametrize("h", np.linspace(0.1, 0.9, 9))
    def test_abel_gamma_product(self, h):
        prod = abel_const(h) * special.gamma(h + 0.5) * special.gamma(1.5 - h)
        assert prod == pytest.approx(1.0, abs=1e-12)

    def test_kernel_constants_fields(self):
        kc = KernelConstants.for_hurst(0.75)
        assert kc.b1 is not None and kc.b1 > 0
        assert kc.abel > 0
        assert kc.molchan_bracket > 0
        low = KernelConstants.for_hurst(0.25)
        assert low.b1 is None
        assert low.abel == abel_const(0.75)  # H <-> 1-H symmetry

    def test_bracket_constant_at_half_is_one(self):
        # M = X = BM: Var(M_1) = 1
        assert KernelConstants.for_hurst(0.5).molchan_bracket == pytest.approx(1.0, rel=1e-12)

    def test_martingale_variance_scaling(self):
        kc = KernelConstants.for_hurst(0.7)
        assert kc.martingale_variance(2.0) == pytest.approx(
            kc.molchan_bracket * 2.0 ** 0.6, rel=1e-14
        )


class TestRepxmKernel:
    def test_zero_offset_closed_form(self):
        # integrand collapses to s^{2H-2}: t^{2H-1} / ((2H-1) B1)
        assert repxm_kernel(1.0, 0.0, 0.75) == pytest.approx(SQRT2_OVER_PI, rel=1e-12)

    def test_vanishes_at_upper_endpoint(self):
        h = 0.75
        bound_const = 1.0 / ((h - 0.5) * beta_b1(h))
        prev = np.inf
        for u in (0.9, 0.99, 0.999, 0.9999):
            val = repxm_kernel(1.0, u, h)
            assert val <= bound_const * (1.0 - u) ** (h - 0.5) + 1e-12
            assert val < prev
            prev = val
        assert prev < 0.1

    def test_against_adaptive_quadrature(self):
        h = 0.75
        val = repxm_kernel(1.0, 0.5, h)
        oracle = quad_touching(0.5, 1.0, h - 0.5, h - 1.5) / beta_b1(h)
        assert val == pytest.approx(oracle, rel=1e-8)

    @pytest.mark.parametrize("t,u,h", [(2.0, 0.3, 0.6), (1.0, 0.05, 0.9), (3.0, 2.9, 0.55)])
    def test_more_quadrature_points(self, t, u, h):
        oracle = quad_touching(u, t, h - 0.5, h - 1.5) / beta_b1(h)
        assert repxm_kernel(t, u, h) == pytest.approx(oracle, rel=1e-8)

    def test_domain(self):
        with pytest.raises(ValueError):
            repxm_kernel(1.0, 1.0, 0.75)
        with pytest.raises(ValueError):
            repxm_kernel(1.0, 0.5, 0.5)

    def test_shape_in_offset_matches_quadrature(self):
        # The kernel is unimodal in u: it rises from t^{2H-1}/((2H-1) B1) at
        # u = 0 to an interior maximum and then decays to 0 at u = t (the
        # adaptive oracle confirms the rise, e.g. 0.4502 at u=0 vs 0.6636 at
        # u=0.5 for H=0.75); monotone decay holds on the upper branch.
        h, t = 0.75, 1.0
        u = np.linspace(0.0, 0.98, 50)
        vals = repxm_kernel(t, u, h)
        oracle = np.array([quad_touching(ui, t, h - 0.5, h - 1.5) for ui in u]) / beta_b1(h)
        np.testing.assert_allclose(vals, oracle, rtol=1e-8)
        diffs = np.diff(vals)
        turn = int(np.argmax(vals))
        assert np.all(diffs[:turn] > 0) and np.all(diffs[turn:] < 0)
        assert 0 < turn < len(u) - 1


class TestZKernel:
    def test_limit_toward_half(self):
        assert z_kernel(1.0, 0.5, 0.5 - 1e-7) == 1.0  # degenerate routing
        vals = [z_kernel(1.0, 0.5, h) for h in (0.4, 0.45, 0.49, 0.499)]
        assert np.all(np.abs(np.diff(np.abs(np.array(vals) - 1.0))) > 0)
        assert abs(vals[-1] - 1.0) < 5e-3

    def test_upper_endpoint_divergence_positive(self):
        h, t = 0.25, 1.0
        vals = [z_kernel(t, s, h) for s in (0.9, 0.99, 0.999, 0.9999)]
        assert np.all(np.diff(vals) > 0)
        # leading term dominates: ratio to (s/t)^{1/2-H} (t-s)^{H-1/2} tends to 1
        s = 0.99999
        lead = (s / t) ** (1 - 2 * h) * 0.0 + (s / t) ** (0.5 - h) * (t - s) ** (h - 0.5)
        assert z_kernel(t, s, h) / lead == pytest.approx(1.0, abs=0.02)

    def test_against_adaptive_quadrature(self):
        h, t, s = 0.25, 1.0, 0.5
        first = (s / t) ** (0.5 - h) * (t - s) ** (h - 0.5)
        corr = quad_touching(s, t, h - 1.5, h - 0.5)
        oracle = first - (h - 0.5) * s ** (0.5 - h) * corr
        assert z_kernel(t, s, h) == pytest.approx(oracle, rel=1e-8)

    def test_domain(self):
        with pytest.raises(ValueError):
            z_kernel(1.0, 0.5, 0.6)
        with pytest.raises(ValueError):
            z_kernel(1.0, 0.0, 0.25)


class TestPartitionKernels:
    def test_f_upper_bound_random(self):
        # f <= t_k^{H-1/2} (t_{k-1} - s)^{H-3/2} * (t/n)
        rng = np.random.default_rng(0)
        grid = TimeGrid(1.0, 64)
        h = 0.75
        for _ in range(100):
            k = int(rng.integers(2, 65))
            ctx = PartitionContext(grid, k)
            s = ctx.t_lower * rng.uniform(0.0, 0.999)
            f = partition_kernel_f(ctx, s, h)
            bound = ctx.t_upper ** (h - 0.5) * (ctx.t_lower - s) ** (h - 1.5) * grid.spacing
            assert f <= bound * (1 + 1e-12)

    def test_f_lower_bound_on_previous_cell(self):
        # f(u)^2 >= 3^{2H-3} t^{2H-1} n^{1-2H} u^{2H-1} for u in (t_{k-3}, t_{k-2})
        rng = np.random.default_rng(1)
        grid = TimeGrid(1.0, 64)
        h = 0.75
        n = grid.n_steps
        for _ in range(100):
            k = int(rng.integers(3, 65))
            ctx = PartitionContext(grid, k)
            lo = grid.points[k - 3]
            u = rng.uniform(lo if lo > 0 else 1e-9, grid.points[k - 2])
            f = partition_kernel_f(ctx, u, h)
            bound = 3.0 ** (2 * h - 3) * 1.0 ** (2 * h - 1) * n ** (1 - 2 * h) * u ** (2 * h - 1)
            assert f * f >= bound * (1 - 1e-12)

    def test_f_against_adaptive_quadrature(self):
        grid = TimeGrid(1.0, 4)
        ctx = PartitionContext(grid, 3)
        h, s = 0.75, 0.25
        val = partition_kernel_f(ctx, s, h)
        oracle, _ = integrate.quad(
            lambda u: u ** (h - 0.5) * (u - s) ** (h - 1.5),
            ctx.t_lower, ctx.t_upper, epsabs=1e-13, epsrel=1e-13,
        )
        assert val == pytest.approx(oracle, rel=1e-8)

    def test_g_degenerate_range_vanishes(self):
        grid = TimeGrid(1.0, 4)
        ctx = PartitionContext(grid, 4)
        h = 0.75
        a = h - 0.5
        for eps in (1e-3, 1e-6, 1e-9, 1e-12):
            val = partition_kernel_g_p(ctx, 1.0 - eps, h, "g")
            # integrand <= t_k^a (u-s)^{a-1}: g <= t_k^a eps^a / a -> 0
            assert 0 < val <= ctx.t_upper ** a * eps ** a / a * (1 + 1e-12)

    def test_g_against_adaptive_quadrature(self):
        grid = TimeGrid(1.0, 4)
        ctx = PartitionContext(grid, 4)
        h, s = 0.75, 0.8
        val = partition_kernel_g_p(ctx, s, h, "g")
        oracle = quad_touching(s, ctx.t_upper, h - 0.5, h - 1.5)
        assert val == pytest.approx(oracle, rel=1e-8)

    def test_p_min_bound_random(self):
        # p <= min((t_{k-1}-s)^{H-3/2} t/n, (1/(1/2-H)) (t/n)^{H-1/2}) for s <= t_{k-2}
        rng = np.random.default_rng(2)
        grid = TimeGrid(1.0, 64)
        h = 0.25
        d = grid.spacing
        for _ in range(100):
            k = int(rng.integers(3, 65))
            ctx = PartitionContext(grid, k)
            s = rng.uniform(1e-6, grid.points[k - 2])
            p = partition_kernel_g_p(ctx, s, h, "p")
            bound = min(
                (ctx.t_lower - s) ** (h - 1.5) * d,
                d ** (h - 0.5) / (0.5 - h),
            )
            assert p <= bound * (1 + 1e-12)

    def test_p_against_adaptive_quadrature(self):
        grid = TimeGrid(1.0, 8)
        ctx = PartitionContext(grid, 5)
        h, s = 0.3, 0.21
        val = partition_kernel_g_p(ctx, s, h, "p")
        oracle, _ = integrate.quad(
            lambda u: (s / u) ** (0.5 - h) * (u - s) ** (h - 1.5),
            ctx.t_lower, ctx.t_upper, epsabs=1e-13, epsrel=1e-13,
        )
        assert val == pytest.approx(oracle, rel=1e-8)

    def test_domain_checks(self):
        grid = TimeGrid(1.0, 8)
        ctx = PartitionContext(grid, 4)
        with pytest.raises(ValueError):
            partition_kernel_f(ctx, 0.5, 0.75)  # s >= t_{k-1}
        with pytest.raises(ValueError):
            partition_kernel_f(ctx, 0.1, 0.4)  # H <= 1/2
        with pytest.raises(ValueError):
            partition_kernel_g_p(ctx, 0.1, 0.75, "g")  # s below the cell
        with pytest.raises(ValueError):
            partition_kernel_g_p(ctx, 0.5, 0.75, "p")  # p needs H < 1/2
        with pytest.raises(ValueError):
            PartitionContext(grid, 0)


class TestDeterministicSumBounds:
    """Tail sums of (t_{k-1} - u)^{2H-3} against their integral bounds."""

    @pytest.mark.parametrize("h", [0.55, 0.6, 0.75, 0.9])
    def test_split_point_variant(self, h):
        n, t = 64, 1.0
        rng = np.random.default_rng(3)
        tk = np.linspace(0, t, n + 1)
        for _ in range(50):
            i0 = int(rng.integers(1, n - 4))
            s = tk[i0]
            u = rng.uniform(0, s)
            ks = np.arange(i0 + 2, n + 1)
            total = np.sum((tk[ks - 1] - u) ** (2 * h - 3))
            bound = (s + t / n - u) ** (2 * h - 3) + n / ((2 - 2 * h) * t) * (
                s + t / n - u
            ) ** (2 * h - 2)
            assert total <= bound + 1e-12

    @pytest.mark.parametrize("h", [0.55, 0.75, 0.9])
    def test_index_variant(self, h):
        n, t = 64, 1.0
        rng = np.random.default_rng(4)
        tk = np.linspace(0, t, n + 1)
        for _ in range(50):
            i = int(rng.integers(1, n - 2))
            u = rng.uniform(0, tk[i])
            ks = np.arange(i + 2, n + 1)
            total = np.sum((tk[ks - 1] - u) ** (2 * h - 3))
            bound = (tk[i + 1] - u) ** (2 * h - 3) + n / ((2 - 2 * h) * t) * (
                tk[i + 1] - u
            ) ** (2 * h - 2)
            assert total <= bound + 1e-12


class TestQuadratureConvergence:
    def test_doubling_nodes_stable(self):
        args = [
            (1.0, 0.5, 0.75), (1.0, 0.01, 0.75), (1.0, 1e-4, 0.9),
            (2.0, 1.9, 0.6), (1.0, 1.0 / 8192, 0.75),
        ]
        for t, u, h in args:
            v64 = repxm_kernel(t, u, h, nodes=64)
            v128 = repxm_kernel(t, u, h, nodes=128)
            assert abs(v64 / v128 - 1.0) < 1e-8
        for t, s, h in [(1.0, 0.5, 0.25), (1.0, 1e-3, 0.3), (1.0, 0.999, 0.45)]:
            v64 = z_kernel(t, s, h, nodes=64)
            v128 = z_kernel(t, s, h, nodes=128)
            assert abs(v64 / v128 - 1.0) < 1e-8
        grid = TimeGrid(1.0, 4)
        ctx = PartitionContext(grid, 4)
        assert partition_kernel_g_p(ctx, 0.8, 0.75, "g", nodes=64) == pytest.approx(
            partition_kernel_g_p(ctx, 0.8, 0.75, "g", nodes=128), rel=1e-8
        )
