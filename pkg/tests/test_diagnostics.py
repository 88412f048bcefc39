import numpy as np
import pytest

import dinavd
from dinavd.diagnostics import (SlopeEntry, audit_monotone, default_audit_tol,
                                diagnose, energy_E, energy_W, fit_rate,
                                little_o_check, tail_integrals)
from dinavd.dynamics import DynamicsParams, Trajectory, TrajectoryMeta

from oracles import loglog_slope


def _i1_run(quad1d, **kw):
    base = dict(alpha=3.1, beta=1.0, t0=1.0, x0=[1.0], v0=[-3.0], t_end=20.0, step=1e-3)
    base.update(kw)
    p = DynamicsParams(**base)
    return dinavd.integrate_dinavd_2nd(quad1d.smooth, p), p


def _stationary_run(quad1d):
    p = DynamicsParams(alpha=3.1, beta=1.0, t0=1.0, x0=[0.0], v0=[0.0],
                       t_end=5.0, step=1e-3)
    return dinavd.integrate_dinavd_2nd(quad1d.smooth, p)


def _synthetic(times, gaps, alpha=3.5, beta=1.0):
    """Trajectory whose phi series is prescribed (for fit/ratio arithmetic)."""
    n = times.size
    p = DynamicsParams(alpha=alpha, beta=beta, t0=float(times[0]), x0=[0.0], v0=[0.0],
                       t_end=float(times[-1]), step=float(times[1] - times[0]),
                       sample_every=1)
    return Trajectory(times=times, xs=np.zeros((n, 1)), vs=np.zeros((n, 1)),
                      phi_vals=gaps, grad_norms=np.zeros(n),
                      meta=TrajectoryMeta("synthetic", p))


class TestEnergyW:
    def test_stationary_is_constant_min(self, quad1d):
        tr = _stationary_run(quad1d)
        for theta in (0.0, 0.5, 1.0):
            w = energy_W(tr, quad1d.smooth, theta)
            assert np.max(np.abs(w - 0.0)) < 1e-15

    def test_theta0_is_mechanical_energy(self, quad1d):
        tr, _ = _i1_run(quad1d, t_end=3.0)
        w0 = energy_W(tr, quad1d.smooth, 0.0)
        direct = tr.phi_vals + 0.5 * np.sum(tr.vs**2, axis=1)
        assert np.array_equal(w0, direct)

    def test_initial_value_hand_computed(self, quad1d):
        # x(1)=1, xd(1)=-3: phi=0.5, xd+grad=-2, W_beta = 0.5 + 2 = 2.5
        tr, _ = _i1_run(quad1d, t_end=3.0)
        wb = energy_W(tr, quad1d.smooth, 1.0)
        assert wb[0] == pytest.approx(2.5, abs=1e-12)

    def test_nonincreasing_on_i1(self, quad1d):
        tr, p = _i1_run(quad1d)
        wb = energy_W(tr, quad1d.smooth, 1.0)
        tol = 1e-8 * (1 + abs(wb[0]))
        mask = tr.times >= max(p.t0, p.alpha * p.beta / 2)
        assert audit_monotone(wb[mask], tol) == []

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 3.5])
    def test_nonincreasing_for_any_positive_alpha(self, quad1d, alpha):
        # the decrease needs only alpha > 0 and t >= alpha*theta/2
        tr, p = _i1_run(quad1d, alpha=alpha, t_end=50.0)
        for theta in (0.0, 0.5, 1.0):
            w = energy_W(tr, quad1d.smooth, theta)
            tol = 1e-8 * (1 + abs(w[0]))
            mask = tr.times >= max(p.t0, alpha * theta / 2)
            assert audit_monotone(w[mask], tol) == []

    def test_theta_out_of_range(self, quad1d):
        tr, _ = _i1_run(quad1d, t_end=3.0)
        with pytest.raises(ValueError):
            energy_W(tr, quad1d.smooth, 1.5)
        with pytest.raises(ValueError):
            energy_W(tr, quad1d.smooth, -0.1)


class TestEnergyE:
    def test_stationary_is_zero(self, quad1d):
        tr = _stationary_run(quad1d)
        E, Es = energy_E(tr, quad1d.smooth, 2.0, np.zeros(1))
        assert np.max(np.abs(E)) < 1e-15

    def test_initial_value_hand_computed(self, quad1d):
        # E_2(1) = 1*(1-0.9)*0.5 + 0.5*(2*1 + (-3+1))^2 + 2*0.1/2*1 = 0.15
        tr, _ = _i1_run(quad1d, t_end=3.0)
        E, _ = energy_E(tr, quad1d.smooth, 2.0, np.zeros(1))
        assert E[0] == pytest.approx(0.15, abs=1e-12)

    def test_scaled_nonincreasing(self, quad1d):
        tr, p = _i1_run(quad1d)
        _, Es = energy_E(tr, quad1d.smooth, 2.0, np.zeros(1))
        mask = tr.times >= max(p.t0, 2 * p.beta)
        tol = 1e-8 * (1 + abs(Es[np.argmax(mask)]))
        assert audit_monotone(Es[mask], tol) == []

    @pytest.mark.parametrize("alpha,lam", [(3.0, 2.0), (3.5, 2.0), (3.5, 2.5),
                                           (4.0, 2.0), (4.0, 3.0)])
    def test_scaled_nonincreasing_across_lambda_range(self, quad1d, alpha, lam):
        # whole admissible band lambda in [2, alpha-1], including endpoints
        tr, p = _i1_run(quad1d, alpha=alpha, t_end=50.0)
        _, Es = energy_E(tr, quad1d.smooth, lam, np.zeros(1))
        mask = tr.times >= max(p.t0, 2 * p.beta)
        tol = 1e-8 * (1 + abs(Es[np.argmax(mask)]))
        assert audit_monotone(Es[mask], tol) == []

    def test_parameter_validation(self, quad1d):
        tr, _ = _i1_run(quad1d, t_end=3.0)
        with pytest.raises(ValueError):
            energy_E(tr, quad1d.smooth, 5.0, np.zeros(1))  # lambda > alpha-1
        tr_low, _ = _i1_run(quad1d, alpha=2.5, t_end=3.0)
        with pytest.raises(ValueError):
            energy_E(tr_low, quad1d.smooth, 2.0, np.zeros(1))  # alpha < 3

    def test_scaled_nan_at_t_le_beta(self, quad1d):
        tr, _ = _i1_run(quad1d, beta=1.5, alpha=3.1, t_end=4.0)
        _, Es = energy_E(tr, quad1d.smooth, 2.0, np.zeros(1))
        assert np.all(np.isnan(Es[tr.times <= 1.5]))
        assert np.all(np.isfinite(Es[tr.times > 1.5]))


class TestAuditMonotone:
    def test_constant_series(self):
        assert audit_monotone([1.0, 1.0, 1.0], 0.0) == []

    def test_arithmetic_example(self):
        # the only increment is 2.5 - 2.0 = 0.5 at index 1
        assert audit_monotone([3.0, 2.0, 2.5], 0.6) == []
        assert audit_monotone([3.0, 2.0, 2.5], 0.4) == [(1, 0.5)]
        assert audit_monotone([3.0, 2.0, 2.5], 0.1) == [(1, 0.5)]

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            audit_monotone([1.0, np.nan], 0.0)

    def test_tolerance_calibration(self, quad1d):
        # default tol at h=1e-3 passes the true decrease and catches a bump
        tr, p = _i1_run(quad1d)
        wb = energy_W(tr, quad1d.smooth, 1.0)
        tol = default_audit_tol(p.step, wb[0])
        assert tol == pytest.approx(1e-8 * (1 + abs(wb[0])))
        assert audit_monotone(wb, tol) == []
        corrupted = wb.copy()
        corrupted[500] += 1e-6
        assert len(audit_monotone(corrupted, tol)) == 1


class TestFitRate:
    def test_exact_power_law(self):
        t = np.linspace(10, 100, 500)
        fit = fit_rate(t, 7.0 * t**-2.0, (10, 100))
        assert fit.slope == pytest.approx(-2.0, abs=1e-9)
        assert fit.r2 == pytest.approx(1.0, abs=1e-12)
        assert fit.slope == pytest.approx(loglog_slope(t, 7.0 * t**-2.0), abs=1e-9)

    def test_floor_exclusion_counted(self):
        t = np.linspace(10, 100, 100)
        g = 7.0 * t**-2.0
        g[::10] = 1e-16
        fit = fit_rate(t, g, (10, 100))
        assert fit.n_floored == 10
        assert fit.slope == pytest.approx(-2.0, abs=1e-6)

    def test_too_few_samples(self):
        t = np.linspace(10, 100, 100)
        with pytest.raises(ValueError, match="too few"):
            fit_rate(t, np.full(100, 1e-16), (10, 100))


class TestLittleO:
    def test_exact_t_minus_2_ratio_one(self, quad1d):
        t = np.linspace(10, 1000, 5000)
        tr = _synthetic(t, 3.0 * t**-2.0)
        assert little_o_check(tr, quad1d.smooth, (10, 100), (500, 1000)) == pytest.approx(1.0, rel=1e-9)

    def test_head_at_floor_errors(self, quad1d):
        t = np.linspace(10, 1000, 5000)
        tr = _synthetic(t, np.full(5000, 1e-16))
        with pytest.raises(ValueError, match="floor"):
            little_o_check(tr, quad1d.smooth, (10, 100), (500, 1000))

    def test_window_ordering(self, quad1d):
        t = np.linspace(10, 1000, 5000)
        tr = _synthetic(t, 3.0 * t**-2.0)
        with pytest.raises(ValueError):
            little_o_check(tr, quad1d.smooth, (500, 1000), (10, 100))

    def test_windowed_sup_ratio_on_residual_series(self, quad1d):
        # the same windowed-sup machinery applies to t*|xd + beta*grad|
        from dinavd.diagnostics import windowed_sup_ratio
        from dinavd.problems import batch_gradient
        tr, p = _i1_run(quad1d, alpha=3.5, t_end=200.0)
        udot = np.linalg.norm(tr.vs + p.beta * batch_gradient(quad1d.smooth, tr.xs),
                              axis=1)
        ratio = windowed_sup_ratio(tr.times, tr.times * udot, (1.0, 20.0), (20.0, 200.0))
        assert ratio <= 1.1  # bounded
        assert ratio < 1.0   # shrinking for alpha > 3


class TestTailIntegrals:
    def test_stationary_all_zero(self, quad1d):
        tr = _stationary_run(quad1d)
        ti = tail_integrals(tr, quad1d.smooth)
        for entry in ti.integrals.values():
            assert entry.total == 0.0

    def test_missing_min_value_notice(self, quad1d):
        tr = _stationary_run(quad1d)
        from dinavd.problems import SmoothFunction
        f = SmoothFunction(dim=1, value=quad1d.smooth.value, gradient=quad1d.smooth.gradient)
        ti = tail_integrals(tr, f)
        assert "t_gap" not in ti.integrals
        assert any("min_value" in n for n in ti.notes)

    def test_i1_speed_integral_converges(self, quad1d):
        tr, _ = _i1_run(quad1d, t_end=200.0)
        ti = tail_integrals(tr, quad1d.smooth)
        assert ti.integrals["inv_t_speed_sq"].last_decade_fraction < 0.01
        assert ti.integrals["t2_grad_sq"].last_decade_fraction < 0.01

    def test_avd_speed_integral_converges(self, quad1d):
        # the 1/t speed integral also settles without the Hessian term
        p = DynamicsParams(alpha=3.1, beta=0.0, t0=1.0, x0=[1.0], v0=[-3.0],
                           t_end=1000.0, step=1e-3)
        tr = dinavd.integrate_avd(quad1d.smooth, p)
        ti = tail_integrals(tr, quad1d.smooth)
        assert ti.integrals["inv_t_speed_sq"].last_decade_fraction < 0.01


class TestBoundednessAndStrongConvergence:
    @pytest.mark.parametrize("cid,x0", [("quad1d", [1.0]), ("illcond2d", [1.0, 1.0]),
                                        ("degenerate2d", [1.0, -0.3])])
    def test_trajectory_bounded_sup_attained_inside(self, cid, x0):
        inst = dinavd.make_instance(cid)
        d = len(x0)
        p = DynamicsParams(alpha=3.1, beta=1.0, t0=1.0, x0=x0, v0=np.zeros(d),
                           t_end=200.0, step=1e-3)
        tr = dinavd.integrate_dinavd_2nd(inst.smooth, p)
        norms = np.linalg.norm(tr.xs, axis=1)
        assert np.all(np.isfinite(norms))
        # the sup is reached early, not still growing at the horizon
        assert int(np.argmax(norms)) < norms.size - 1
        assert norms[-1] <= norms.max() + 1e-12

    def test_strongly_convex_final_distance(self, quad1d):
        p = DynamicsParams(alpha=4.0, beta=1.0, t0=1.0, x0=[1.0], v0=[-3.0],
                           t_end=1000.0, step=1e-3)
        tr = dinavd.integrate_dinavd_2nd(quad1d.smooth, p)
        assert abs(tr.xs[-1, 0]) <= 1e-4


class TestDiagnose:
    def test_full_report_on_i1(self, quad1d):
        tr, p = _i1_run(quad1d)
        rep = diagnose(tr, quad1d.smooth)
        assert rep.violations["W0"] == []
        assert rep.violations["Wbeta"] == []
        assert rep.violations["E_scaled"] == []
        assert rep.lam == 2.0
        assert "gap" in rep.fitted_slopes
        assert isinstance(rep.fitted_slopes["gap"], SlopeEntry)
        rows = rep.to_rows()
        assert rows.shape == (tr.times.size, 7)

    def test_report_skips_energy_below_alpha3(self, quad1d):
        tr, _ = _i1_run(quad1d, alpha=2.0, t_end=3.0)
        rep = diagnose(tr, quad1d.smooth)
        assert rep.lam is None
        assert np.all(np.isnan(rep.E_lambda))
        assert any("anchored" in n for n in rep.notes)
