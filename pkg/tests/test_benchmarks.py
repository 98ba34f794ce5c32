import numpy as np
import pytest

from savns.benchmarks import (
    THICK_LAYER,
    THIN_LAYER,
    ShearLayerConfig,
    fit_rate,
    run_convergence,
    run_manufactured,
    run_shear_layer,
    shear_layer_initial,
)
from savns.fourier import (
    SpectralField,
    divergence,
    h1_norm,
    l2_norm,
    make_grid,
    max_divergence,
    to_physical,
)
from savns.integrator import SolverError


def small_config(**kw) -> ShearLayerConfig:
    base = dict(rho=10.0, nu=1e-3, N=16, dt=0.01, T_final=0.1, k=2)
    base.update(kw)
    return ShearLayerConfig(**base)


class TestFitRate:
    def test_exact_power_law(self):
        pairs = [(dt, 3.0 * dt**2.5) for dt in (0.1, 0.05, 0.025, 0.0125)]
        assert fit_rate(pairs) == pytest.approx(2.5, abs=1e-12)

    def test_constant_errors(self):
        assert fit_rate([(0.1, 0.3), (0.05, 0.3), (0.025, 0.3)]) == pytest.approx(0.0, abs=1e-12)

    def test_noisy(self):
        rng = np.random.default_rng(7)
        dts = 0.1 * 0.5 ** np.arange(6)
        pairs = [(dt, dt**3 * (1 + 0.01 * rng.standard_normal())) for dt in dts]
        assert fit_rate(pairs) == pytest.approx(3.0, abs=0.02)

    @pytest.mark.parametrize(
        "pairs",
        [[(0.1, 1.0), (0.05, 0.5)], [(0.1, 1.0), (0.05, 0.0), (0.02, 0.1)], [(0.1, np.nan)] * 3],
    )
    def test_invalid(self, pairs):
        with pytest.raises(ValueError):
            fit_rate(pairs)


class TestShearLayerConfig:
    def test_presets(self):
        assert (THICK_LAYER.rho, THICK_LAYER.nu, THICK_LAYER.N, THICK_LAYER.dt) == (30.0, 1e-4, 128, 8e-4)
        assert (THIN_LAYER.rho, THIN_LAYER.nu, THIN_LAYER.N, THIN_LAYER.dt) == (100.0, 5e-5, 256, 3e-4)
        assert THICK_LAYER.delta == THIN_LAYER.delta == 0.05

    @pytest.mark.parametrize(
        "kw", [dict(rho=0.0), dict(nu=-1.0), dict(dt=np.inf), dict(N=15), dict(N=2), dict(k=6), dict(delta=-0.1)]
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            small_config(**kw)


class TestShearLayerInitial:
    def test_solenoidal_and_shape(self):
        u = shear_layer_initial(small_config(N=64, rho=30.0))
        assert u.grid.lengths == (1.0, 1.0) and u.grid.modes == (64, 64)
        assert max_divergence(u) <= 1e-12
        assert l2_norm(divergence(u)) <= 1e-12 * h1_norm(u)

    def test_unperturbed_is_pure_shear(self):
        u = shear_layer_initial(small_config(N=32, delta=0.0))
        vals = to_physical(u).values
        assert np.max(np.abs(vals[1])) < 1e-14
        # x-independent first component
        assert np.max(np.abs(vals[0] - vals[0][:1, :])) < 1e-14

    def test_profile_values(self):
        cfg = small_config(N=128, rho=30.0, delta=0.05)
        vals = to_physical(shear_layer_initial(cfg)).values
        x, y = (np.broadcast_to(c, vals.shape[1:]) for c in shear_layer_initial(cfg).grid.coordinates())
        # the kinks at y = 0 and 0.5 spoil pointwise accuracy there, so compare near y = 0.25
        sel = np.abs(y - 0.25) < 0.1
        assert np.max(np.abs(vals[0][sel] - np.tanh(30.0 * (y[sel] - 0.25)))) < 1e-3
        assert np.max(np.abs(vals[1] - 0.05 * np.sin(2 * np.pi * x))) < 1e-12


class TestRunShearLayer:
    def test_zero_data(self):
        cfg = small_config()
        grid = make_grid(2, 16, 1.0)
        res = run_shear_layer(cfg, u0=SpectralField.zeros(grid, 2))
        assert np.all(res.state.u.coeffs == 0)
        assert all(r.r == 1.0 and r.eta == 1.0 for r in res.records)

    def test_records_and_snapshots(self):
        cfg = small_config(T_final=0.1)
        seen = []
        res = run_shear_layer(cfg, snapshot_times=(0.0, 0.05, 0.1), callback=lambda s: seen.append(s.t))
        assert len(res.records) == 11 and len(seen) == 10
        assert [round(t, 12) for t, _ in res.snapshots] == [0.0, 0.05, 0.1]
        assert res.state.t == pytest.approx(0.1)
        r = [rec.r for rec in res.records]
        assert all(b <= a for a, b in zip(r, r[1:]))
        for _, w in res.snapshots:
            assert w.ncomp == 1 and abs(w.values.mean()) < 1e-14
        assert all(rec.div_max <= 1e-11 for rec in res.records)

    def test_unstabilized_runs(self):
        res = run_shear_layer(small_config(), stabilized=False)
        assert all(rec.eta == 1.0 for rec in res.records)
        assert res.state.u.is_finite()

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_unstabilized_blowup_raises(self):
        # inviscid-scale viscosity with a huge step on a sharp layer
        cfg = small_config(rho=200.0, nu=1e-8, N=32, dt=1.0, T_final=200.0, k=4)
        with pytest.raises(SolverError):
            run_shear_layer(cfg, stabilized=False)

    def test_stabilized_survives_huge_steps(self):
        cfg = small_config(rho=200.0, nu=1e-8, N=32, dt=1.0, T_final=200.0, k=4)
        res = run_shear_layer(cfg)
        assert res.state.u.is_finite()
        r = [rec.r for rec in res.records]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(r, r[1:]))


class TestManufacturedRuns:
    def test_exact_bootstrap_errors_small(self):
        run = run_manufactured(2, 0.02, N=24, T=0.2)
        assert run.state.step_index == 10
        assert run.velocity_error < 1e-2 and run.pressure_error < 1e-2
        assert run.max_xi_defect < 0.1
        assert len(run.records) == 9

    def test_cascade_bootstrap(self):
        run = run_manufactured(3, 0.02, N=24, T=0.2, bootstrap="cascade")
        assert len(run.records) == 10
        assert np.isfinite(run.velocity_error)

    def test_errors_decrease(self):
        a = run_manufactured(2, 0.04, N=24, T=0.4)
        b = run_manufactured(2, 0.02, N=24, T=0.4)
        assert b.velocity_error < a.velocity_error / 3

    def test_reference_grid_exposes_spatial_error(self):
        same = run_manufactured(4, 0.01, N=8, T=0.2)
        ref = run_manufactured(4, 0.01, N=8, T=0.2, reference_N=48)
        fine = run_manufactured(4, 0.01, N=24, T=0.2, reference_N=48)
        assert same.velocity_error < 1e-5
        assert ref.velocity_error > 1e3 * same.velocity_error
        # at N = 24 the truncation tail is negligible and the time error is left
        assert fine.velocity_error == pytest.approx(same.velocity_error, rel=0.1)
        with pytest.raises(ValueError):
            run_manufactured(2, 0.05, N=24, T=0.2, reference_N=16)

    @pytest.mark.parametrize("kw", [dict(dt=0.03), dict(dt=0.5, k=3, T=1.0), dict(bootstrap="x")])
    def test_invalid(self, kw):
        args = dict(k=2, dt=0.02, N=16, T=0.2)
        args.update(kw)
        with pytest.raises(ValueError):
            run_manufactured(**args)

    def test_convergence_first_order(self):
        res = run_convergence(1, [0.1, 0.05, 0.025, 0.0125], N=24, T=0.5)
        assert res.k == 1 and res.dts == [0.1, 0.05, 0.025, 0.0125]
        assert abs(res.fitted_rate_velocity - 1) < 0.25
        assert abs(res.fitted_rate_pressure - 1) < 0.25
        assert len(res.max_xi_defect) == 4

    def test_first_order_eta_exponents(self):
        # rescale exponent 2 (default) and the literal exponent 1 are both first order
        dts = [0.1, 0.05, 0.025, 0.0125]
        default = run_convergence(1, dts, N=24, T=0.5)
        literal = run_convergence(1, dts, N=24, T=0.5, eta_mode="literal")
        assert abs(literal.fitted_rate_velocity - 1) < 0.25
        assert default.rows == run_convergence(1, dts, N=24, T=0.5, eta_mode="theorem").rows
        assert default.rows != literal.rows

    def test_convergence_invalid(self):
        with pytest.raises(ValueError):
            run_convergence(1, [0.1, 0.05])
        with pytest.raises(ValueError):
            run_convergence(1, [0.05, 0.1, 0.025])
