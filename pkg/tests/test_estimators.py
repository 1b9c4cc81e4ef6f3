"""Estimator tests: scaling identities, gamma-oracle targets, Monte Carlo
limits, Holder estimation, power-law fitting."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fbmchar import (
    DegeneratePathError,
    EstimateWithCI,
    HolderExponentEstimator,
    SamplePath,
    TimeGrid,
    gaussian_abs_moment,
    generate_davies_harte,
    holder_exponent_estimate,
    p_variation,
    powerlaw_fit,
    weighted_qv,
    weighted_qv_tail,
)
from fbmchar.grid import BracketPath

from conftest import linear_path

ABS_MOMENT_4_3 = 0.830860925029559083  # E|Z|^{4/3}, frozen with mpmath


def random_walk(grid, seed, role="X"):
    rng = np.random.default_rng(seed)
    return SamplePath(
        grid, np.concatenate([[0.0], np.cumsum(rng.standard_normal(grid.n_steps))]), role
    )


class TestWeightedQV:
    def test_zero_path(self):
        grid = TimeGrid(1.0, 64)
        assert weighted_qv(SamplePath(grid, np.zeros(65), "X"), 0.6) == 0.0

    def test_linear_path_value(self):
        n, h = 4096, 0.75
        val = weighted_qv(linear_path(TimeGrid(1.0, n)), h)
        assert val == pytest.approx(n ** (2 * h - 2), rel=1e-10)
        assert val == pytest.approx(0.015625, rel=1e-10)

    def test_fbm_mean_near_power_of_horizon(self):
        h, n, n_paths = 0.7, 512, 500
        ens = generate_davies_harte(TimeGrid(1.0, n), h, 61, n_paths)
        vals = np.array([weighted_qv(p, h) for p in ens.paths])
        se = vals.std(ddof=1) / np.sqrt(n_paths)
        assert abs(vals.mean() - 1.0) <= 3 * se

    def test_quadratic_scaling_exact(self):
        grid = TimeGrid(1.0, 128)
        p = random_walk(grid, 1)
        doubled = SamplePath(grid, 2.0 * p.values, "X")
        assert weighted_qv(doubled, 0.3) == 4.0 * weighted_qv(p, 0.3)

    @given(c=st.floats(0.01, 100), h=st.floats(0.05, 0.95))
    @settings(max_examples=100, deadline=None)
    def test_quadratic_scaling_general(self, c, h):
        grid = TimeGrid(1.0, 32)
        p = random_walk(grid, 2)
        scaled = SamplePath(grid, c * p.values, "X")
        assert weighted_qv(scaled, h) == pytest.approx(
            c * c * weighted_qv(p, h), rel=1e-12
        )


class TestWeightedQVTail:
    def test_zero_split_equals_full(self):
        grid = TimeGrid(1.0, 128)
        p = random_walk(grid, 3)
        assert weighted_qv_tail(p, 0.4, 0.0) == weighted_qv(p, 0.4)

    def test_non_grid_split_rejected_with_guidance(self):
        grid = TimeGrid(1.0, 128)
        p = random_walk(grid, 4)
        with pytest.raises(ValueError, match="n_steps"):
            weighted_qv_tail(p, 0.4, 0.3333)

    def test_fbm_tail_mean(self):
        # tail limit t^{2H-1} (t - s) = 0.5 for s = t/2, every H
        h, n, n_paths = 0.3, 512, 500
        ens = generate_davies_harte(TimeGrid(1.0, n), h, 67, n_paths)
        vals = np.array([weighted_qv_tail(p, h, 0.5) for p in ens.paths])
        se = vals.std(ddof=1) / np.sqrt(n_paths)
        assert abs(vals.mean() - 0.5) <= 3 * se


class TestPVariation:
    def test_gaussian_abs_moment_q2_exact(self):
        assert gaussian_abs_moment(2.0) == 1.0

    def test_half_equals_quadratic_variation(self):
        grid = TimeGrid(1.0, 256)
        p = random_walk(grid, 5)
        inc = p.increments()
        assert p_variation(p, 0.5) == pytest.approx(np.sum(inc * inc), rel=1e-14)

    def test_brownian_limit_is_horizon(self):
        h, n, n_paths = 0.5, 512, 500
        ens = generate_davies_harte(TimeGrid(1.0, n), h, 71, n_paths)
        vals = np.array([p_variation(p, h) for p in ens.paths])
        se = vals.std(ddof=1) / np.sqrt(n_paths)
        assert abs(vals.mean() - 1.0) <= 3 * se

    def test_fbm_mean_matches_gamma_oracle(self):
        h, n, n_paths = 0.75, 512, 500
        ens = generate_davies_harte(TimeGrid(1.0, n), h, 73, n_paths)
        vals = np.array([p_variation(p, h) for p in ens.paths])
        se = vals.std(ddof=1) / np.sqrt(n_paths)
        assert gaussian_abs_moment(1.0 / h) == pytest.approx(ABS_MOMENT_4_3, rel=1e-13)
        assert abs(vals.mean() - ABS_MOMENT_4_3) <= 3 * se


class TestHolderEstimate:
    def test_linear_path_saturates(self):
        est = holder_exponent_estimate(linear_path(TimeGrid(1.0, 4096)))
        assert est.value == 1.0

    @pytest.mark.parametrize("h", [0.25, 0.5])
    def test_fbm_estimates_concentrate(self, h):
        n, n_paths = 4096, 200
        ens = generate_davies_harte(TimeGrid(1.0, n), h, 79, n_paths)
        vals = np.array([holder_exponent_estimate(p).value for p in ens.paths])
        assert np.mean(np.abs(vals - h) <= 0.1) >= 0.9

    def test_degenerate_path_reported(self):
        grid = TimeGrid(1.0, 128)
        with pytest.raises(DegeneratePathError):
            holder_exponent_estimate(SamplePath(grid, np.zeros(129), "X"))

    def test_minimum_size(self):
        with pytest.raises(ValueError, match="n >= 64"):
            holder_exponent_estimate(random_walk(TimeGrid(1.0, 32), 6))

    def test_estimate_with_ci_invariants(self):
        est = EstimateWithCI(1.0, 0.1, 50)
        lo, hi = est.interval()
        assert (lo, hi) == (0.7, 1.3)
        assert est.covers(1.25)
        assert not est.covers(1.5)
        with pytest.raises(ValueError):
            EstimateWithCI(1.0, -0.1, 50)

    def test_sklearn_wrapper(self):
        X = generate_davies_harte(TimeGrid(1.0, 1024), 0.5, 83, 20).to_matrix()
        est = HolderExponentEstimator().fit(X)
        assert est.estimates_.shape == (20,)
        assert abs(est.median_ - 0.5) < 0.15


class TestPowerLawFit:
    def test_exact_recovery(self):
        grid = TimeGrid(1.0, 512)
        fit = powerlaw_fit(BracketPath(grid, 2.0 * grid.points ** 0.6), 0.1, 1.0)
        assert fit.coefficient == pytest.approx(2.0, abs=1e-10)
        assert fit.exponent == pytest.approx(0.6, abs=1e-10)
        assert fit.residual <= 1e-12

    def test_constant_input_zero_exponent(self):
        grid = TimeGrid(1.0, 512)
        values = np.full(513, 3.0)
        values[0] = 0.0
        fit = powerlaw_fit(BracketPath(grid, values), 0.1, 1.0)
        assert fit.exponent == pytest.approx(0.0, abs=1e-12)

    def test_rejects_nonpositive_in_range(self):
        grid = TimeGrid(1.0, 16)
        values = np.zeros(17)
        with pytest.raises(ValueError, match="positive"):
            powerlaw_fit(BracketPath(grid, values), 0.1, 1.0)

    def test_mean_bracket_exponent(self):
        h, n, n_paths = 0.7, 512, 500
        grid = TimeGrid(1.0, n)
        ens = generate_davies_harte(grid, h, 89, n_paths)
        from fbmchar.transforms import molchan_weight_matrix

        K = molchan_weight_matrix(grid, h)
        M = np.diff(ens.to_matrix(), axis=1) @ K.T
        mean_bracket = np.concatenate([[0.0], (np.diff(
            np.hstack([np.zeros((n_paths, 1)), M]), axis=1) ** 2).mean(axis=0).cumsum()])
        fit = powerlaw_fit(BracketPath(grid, mean_bracket), 0.1, 1.0)
        assert abs(fit.exponent - (2 - 2 * h)) <= 0.1


class TestL1Direction:
    @pytest.mark.parametrize("h", [0.25, 0.5, 0.75])
    def test_mean_abs_deviation_shrinks_with_refinement(self, h):
        n_paths, n = 500, 4096
        ens = generate_davies_harte(TimeGrid(1.0, n), h, 97, n_paths)
        X = ens.to_matrix()
        devs = []
        for stride in (4, 1):  # n = 1024 then n = 4096
            sub = X[:, ::stride]
            m = sub.shape[1] - 1
            inc = np.diff(sub, axis=1)
            wq = m ** (2 * h - 1.0) * (inc ** 2).sum(axis=1)
            devs.append(np.abs(wq - 1.0).mean())
        assert devs[1] < devs[0]
