import numpy as np
import pytest

from nematicon.director import (
    BECAME_INCREASING,
    SURVIVED,
    WENT_NEGATIVE,
    ShootConfig,
    oracle_linear_director,
)
from nematicon.errors import BracketError
from nematicon.grid import Grid, Params, RealProfile, relative_l2_error
from nematicon.standing import (
    PicardConfig,
    march_u,
    picard_fixed_point,
    shoot_u,
    uniqueness_scan,
)


def class_v_holds(values, tol=0.0):
    support = values[values > 0]
    return support.size > 10 and np.all(np.diff(support) <= tol)


class TestMarchU:
    def test_small_amplitude_tracks_gaussian(self):
        # at mu = -H the linearization is the harmonic ground mode
        grid = Grid.half_line(3001, 0.002)
        p = Params(H=1.0, mu=-1.0, lam=0.0, b=1.0)
        beta = 1e-3
        out = march_u(beta, RealProfile.zeros(grid), p)
        keep = out.first_bad_index or grid.n_points
        x = grid.x[:keep]
        got = out.profile.values[:keep]
        want = beta * np.exp(-0.5 * x**2)
        err = np.sqrt(np.trapezoid((got - want) ** 2, dx=grid.dx))
        ref = np.sqrt(np.trapezoid(want**2, dx=grid.dx))
        assert err / ref <= 5e-2

    def test_classification_scan(self):
        # brute scan over amplitudes: small ones regrow, large ones cross zero
        grid = Grid.half_line(3001, 0.002)
        p = Params(H=1.0, mu=-0.8, lam=0.0, b=1.0)
        rho = RealProfile.zeros(grid)
        kinds = [march_u(b, rho, p).classification for b in np.linspace(0.05, 3.0, 40)]
        assert kinds[0] == BECAME_INCREASING
        assert kinds[-1] == WENT_NEGATIVE
        decided = [k for k in kinds if k != SURVIVED]
        flips = sum(a != b for a, b in zip(decided, decided[1:]))
        assert flips == 1

    def test_rejects_nonpositive_amplitude(self):
        grid = Grid.half_line(101, 0.01)
        p = Params(H=1.0, mu=-0.8)
        with pytest.raises(ValueError):
            march_u(0.0, RealProfile.zeros(grid), p)


class TestShootU:
    def test_baseline_profile(self):
        grid = Grid.half_line(3001, 0.002)
        p = Params(H=1.0, mu=-0.8, lam=0.0, b=1.0)
        u0, u = shoot_u(RealProfile.zeros(grid), p, ShootConfig(1e-6, 10.0))
        assert u0 > 0
        assert class_v_holds(u.values)

    def test_near_bifurcation_amplitude_is_small(self):
        grid = Grid.half_line(3001, 0.002)
        p = Params(H=2.0, mu=-1.9999, lam=0.0, b=1.0)
        u0, u = shoot_u(RealProfile.zeros(grid), p, ShootConfig(1e-8, 1.0))
        mass = 2.0 * np.trapezoid(u.values**2, dx=grid.dx)
        assert u0 <= 2e-2
        assert mass <= 1e-3

    def test_degenerate_bracket(self):
        grid = Grid.half_line(1001, 0.006)
        p = Params(H=1.0, mu=-0.8)
        with pytest.raises((BracketError, ValueError)):
            shoot_u(RealProfile.zeros(grid), p, ShootConfig(0.3, 0.300000001))


class TestPicard:
    def test_baseline_converges(self, fig1_wave):
        assert fig1_wave.converged
        assert fig1_wave.picard_iters_used <= 15
        assert class_v_holds(fig1_wave.u.values)
        assert class_v_holds(fig1_wave.rho.values)

    def test_small_amplitude_point(self):
        grid = Grid.half_line(3001, 0.002)
        wave = picard_fixed_point(grid, Params(H=2.0, mu=-1.9, lam=0.1, b=1.0))
        assert wave.converged
        assert wave.u0 < 0.5
        assert class_v_holds(wave.u.values)

    def test_semilinear_director_consistency(self):
        # lam = 0 run: the shot director against the boundary-value solve
        # of u^2, on a window wide enough that the truncation mismatch
        # (~e^{-sqrt(b) L}) sits below the first-order marching error
        p = Params(H=1.0, mu=-0.8, lam=0.0, b=1.0)
        errs = []
        for n, dx in ((5001, 0.002), (10001, 0.001)):
            wave = picard_fixed_point(Grid.half_line(n, dx), p)
            oracle = oracle_linear_director(wave.u, p.b)
            errs.append(relative_l2_error(wave.rho, oracle))
        assert 1.5 <= errs[0] / errs[1] <= 3.0

    def test_fixed_point_residual(self, fig1_grid, fig1_params, fig1_wave):
        from nematicon.director import shoot_director

        rho_next = shoot_director(fig1_wave.u, fig1_params)
        u0_next, u_next = shoot_u(
            rho_next, fig1_params, ShootConfig(0.8 * fig1_wave.u0, 1.2 * fig1_wave.u0)
        )
        change = np.max(np.abs(u_next.values - fig1_wave.u.values)) / np.max(
            fig1_wave.u.values
        )
        assert change <= max(1e-6, 3.0 * fig1_wave.final_delta)

    def test_discrete_equation_residual_refines(self, fig1_params):
        # centered interior residual of the scalar equation drops with dx
        def residual(wave):
            grid = wave.u.grid
            u, rho = wave.u.values, wave.rho.values
            dx = grid.dx
            x = grid.x
            lap = (u[2:] - 2 * u[1:-1] + u[:-2]) / dx**2
            res = (
                lap
                - fig1_params.H**2 * x[1:-1] ** 2 * u[1:-1]
                + u[1:-1] ** 3
                + rho[1:-1] * u[1:-1]
                - fig1_params.mu * u[1:-1]
            )
            keep = u[1:-1] > 1e-3 * np.max(u)
            return np.max(np.abs(res[keep]))

        values = []
        for n, dx in ((1501, 0.004), (3001, 0.002), (6001, 0.001)):
            wave = picard_fixed_point(Grid.half_line(n, dx), fig1_params)
            values.append(residual(wave))
        assert 1.5 <= values[0] / values[1] <= 3.2
        assert 1.5 <= values[1] / values[2] <= 3.2

    def test_relaxation_flag_plain(self):
        # theta = 1 reproduces the undamped iteration (slow but steady)
        grid = Grid.half_line(1001, 0.006)
        p = Params(H=1.0, mu=-0.8, lam=0.1, b=1.0)
        wave = picard_fixed_point(grid, p, PicardConfig(max_iters=10, relaxation=1.0))
        ratios = [b / a for a, b in zip(wave.deltas, wave.deltas[1:])]
        assert all(r < 1.0 for r in ratios[2:])

    def test_invalid_params_rejected(self):
        grid = Grid.half_line(1001, 0.006)
        with pytest.raises(ValueError):
            picard_fixed_point(grid, Params(H=1.0, mu=-0.8, a=1.0))


class TestUniquenessScan:
    def test_single_beta(self, fig1_params, fig1_wave):
        scan = uniqueness_scan(fig1_params, [0.5], fig1_wave.rho)
        assert len(scan.rows) == 1
        assert scan.transition_count == 0

    def test_against_zero_director(self):
        grid = Grid.half_line(3001, 0.002)
        p = Params(H=2.0, mu=-1.99, lam=0.0, b=1.0)
        u0, _ = shoot_u(RealProfile.zeros(grid), p, ShootConfig(1e-8, 1.0))
        betas = np.linspace(0.25 * u0, 4.0 * u0, 60)
        scan = uniqueness_scan(p, betas, RealProfile.zeros(grid), strict=True)
        assert scan.transition_count == 1
        lo, hi = scan.transition_interval
        assert lo <= u0 <= hi

    def test_unsorted_rejected(self, fig1_params, fig1_wave):
        with pytest.raises(ValueError):
            uniqueness_scan(fig1_params, [1.0, 0.5], fig1_wave.rho)
