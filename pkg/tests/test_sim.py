import math
from dataclasses import replace

import numpy as np
import pytest

from gimbalsim.control import ControlGains
from gimbalsim.plant import GimbalState, NoiseSpec
from gimbalsim.sim import (
    COLUMNS,
    ConstantPlatform,
    ReferenceSpec,
    Scenario,
    SimulationDiverged,
    SinusoidalPlatform,
    TablePlatform,
    UnknownPresetError,
    fit_decay_slope,
    integrate,
    integrated_abs_error,
    make_reference,
    peak_abs_error,
    platform_rates,
    preset,
    preset_description,
    preset_names,
    rms,
    settling_time,
)

STILL = ConstantPlatform()


def open_loop(duration, step, x0, platform=STILL, name="ol"):
    return Scenario(
        name=name,
        controller="open-loop",
        duration=duration,
        step_size=step,
        initial_state=x0,
        platform=platform,
    )


class TestPlatformProfiles:
    def test_preset_motion_at_zero(self):
        b = platform_rates(SinusoidalPlatform(), 0.0)
        assert (b.p, b.q, b.r) == (0.0, 0.0, 0.0)
        assert b.p_dot == pytest.approx(0.1 * math.pi / 15)
        assert b.q_dot == pytest.approx(0.1 * math.pi / 20)
        assert b.r_dot == pytest.approx(0.2 * math.pi / 15)

    def test_quarter_period_peak(self):
        b = platform_rates(SinusoidalPlatform(), 7.5)
        assert b.p == pytest.approx(0.1, rel=1e-12)
        assert b.p_dot == pytest.approx(0.0, abs=1e-15)

    def test_constant_profile_has_zero_derivatives(self):
        b = platform_rates(ConstantPlatform(0.1, -0.2, 0.3), 12.0)
        assert (b.p, b.q, b.r) == (0.1, -0.2, 0.3)
        assert (b.p_dot, b.q_dot, b.r_dot) == (0.0, 0.0, 0.0)

    def test_table_interpolation_and_slope(self):
        tab = TablePlatform(times=(0.0, 1.0, 3.0), p=(0.0, 1.0, 0.0), q=(0.0, 0.0, 2.0), r=(1.0, 1.0, 1.0))
        b = tab.rates(0.5)
        assert b.p == pytest.approx(0.5)
        assert b.p_dot == pytest.approx(1.0)
        b = tab.rates(2.0)
        assert b.p == pytest.approx(0.5)
        assert b.p_dot == pytest.approx(-0.5)
        assert b.q_dot == pytest.approx(1.0)
        # clamped outside the table
        assert tab.rates(9.0).p == 0.0
        assert tab.rates(9.0).p_dot == 0.0

    def test_table_validation(self):
        with pytest.raises(ValueError):
            TablePlatform(times=(0.0,), p=(1.0,), q=(1.0,), r=(1.0,))
        with pytest.raises(ValueError):
            TablePlatform(times=(0.0, 0.0), p=(1.0, 1.0), q=(1.0, 1.0), r=(1.0, 1.0))


class TestReferences:
    def test_zero(self):
        traj = make_reference("zero")
        assert (traj.value(3.0), traj.d1(3.0), traj.d2(3.0)) == (0.0, 0.0, 0.0)

    def test_sinusoid_analytic_derivatives(self):
        traj = make_reference("sinusoid", amplitude=1.0, omega=math.pi / 25)
        assert traj.value(0.0) == 0.0
        assert traj.d1(0.0) == pytest.approx(math.pi / 25)
        assert traj.d2(0.0) == pytest.approx(0.0, abs=1e-15)
        # spot-check declared derivatives against finite differences
        h1, h2 = 1e-6, 1e-4
        for t in (1.3, 7.7, 20.1):
            fd1 = (traj.value(t + h1) - traj.value(t - h1)) / (2 * h1)
            fd2 = (traj.value(t + h2) - 2 * traj.value(t) + traj.value(t - h2)) / (h2 * h2)
            assert traj.d1(t) == pytest.approx(fd1, abs=1e-8)
            assert traj.d2(t) == pytest.approx(fd2, abs=1e-6)

    def test_step_window(self):
        traj = make_reference("step", amplitude=math.pi / 6, t_on=5.0, t_off=25.0)
        assert traj.value(4.999) == 0.0
        assert traj.value(5.0) == math.pi / 6
        assert traj.value(24.999) == math.pi / 6
        assert traj.value(25.0) == 0.0
        assert traj.d1(6.0) == 0.0 and traj.d2(6.0) == 0.0

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            make_reference("ramp")


class TestScenarioValidation:
    def test_unknown_controller(self):
        with pytest.raises(ValueError, match="controller"):
            Scenario(controller="banana")

    def test_gains_required(self):
        with pytest.raises(ValueError, match="gains"):
            Scenario(controller="stabilize")
        with pytest.raises(ValueError, match="c1..c4"):
            Scenario(controller="los-track", gains=ControlGains(1.0, 2.0))

    def test_positive_duration_and_step(self):
        with pytest.raises(ValueError):
            Scenario(controller="open-loop", duration=0.0)
        with pytest.raises(ValueError):
            Scenario(controller="open-loop", step_size=-1e-3)

    def test_coarse_step_warning(self):
        with pytest.warns(UserWarning, match="coarse"):
            Scenario(controller="stabilize", gains=ControlGains(20.0, 16.0), step_size=0.05)


class TestIntegrate:
    def test_zero_dynamics_all_rows_zero(self):
        rec = integrate(open_loop(1.0, 0.01, GimbalState(0.0, 0.0, 0.0, 0.0)))
        assert rec.n_rows == 101
        assert np.all(rec.data[:, 1:] == 0.0)
        assert np.all(np.diff(rec.t) > 0)

    def test_double_integrator_polynomial_exactness(self):
        # dyadic step: accumulation is exact, x1(T) == T bitwise
        h = 2.0 ** -10
        rec = integrate(open_loop(1.0, h, GimbalState(0.0, 1.0, 0.0, 0.0)))
        assert rec.n_rows == 1025
        assert rec.data[-1, COLUMNS.index("x1")] == 1.0
        assert rec.data[-1, COLUMNS.index("theta_q")] == 1.0

    def test_row_count_matches_duration_over_step(self):
        rec = integrate(open_loop(2.0, 0.004, GimbalState(0.0, 0.0, 0.0, 0.0)))
        assert rec.n_rows == 501

    def test_rejects_non_integer_step_count(self):
        with pytest.raises(ValueError, match="whole number"):
            integrate(open_loop(1.0, 0.0003, GimbalState(0.0, 0.0, 0.0, 0.0)))

    def test_drift_free_rates_stay_constant(self):
        rec = integrate(open_loop(2.0, 0.001, GimbalState(0.0, 0.3, 0.0, -0.2)))
        assert np.all(rec.col("x2") == 0.3)
        assert np.all(rec.col("x4") == -0.2)

    def test_determinism_bit_identical(self):
        sc = replace(
            preset("fig3-stab-noise"), duration=2.0, name="det"
        )
        a = integrate(sc)
        b = integrate(sc)
        assert np.array_equal(a.data, b.data)

    def test_seed_changes_noise_stream(self):
        sc = replace(preset("fig3-stab-noise"), duration=1.0, name="s1")
        a = integrate(sc)
        b = integrate(replace(sc, noise=replace(sc.noise, seed=999)))
        assert not np.array_equal(a.col("noise_y"), b.col("noise_y"))

    def test_noise_draws_recorded_and_used(self):
        sc = replace(preset("fig3-stab-noise"), duration=0.5, name="nz")
        rec = integrate(sc)
        ny = rec.col("noise_y")
        assert np.any(ny != 0.0)
        assert np.std(ny) == pytest.approx(sc.noise.sigma_y, rel=0.2)

    def test_theta_consistency_with_los_rates(self, rec_fig3):
        h = rec_fig3.scenario.step_size
        for th_col, rate_col in (("theta_q", "q_a"), ("theta_r", "r_a")):
            th = rec_fig3.col(th_col)
            rate = rec_fig3.col(rate_col)
            fd = (th[2:] - th[:-2]) / (2 * h)
            assert np.max(np.abs(fd - rate[1:-1])) < 1e-5

    def test_rk4_order_on_smooth_dynamics(self):
        x0 = GimbalState(0.1, 0.4, -0.2, 0.3)
        runs = {
            h: integrate(open_loop(10.0, h, x0, SinusoidalPlatform(), name=f"ol{h}"))
            for h in (0.02, 0.01, 0.005)
        }
        d1 = np.max(np.abs(runs[0.02].data[:, 1:7] - runs[0.01].data[::2, 1:7]))
        d2 = np.max(np.abs(runs[0.01].data[:, 1:7] - runs[0.005].data[::2, 1:7]))
        assert 12.0 <= d1 / d2 <= 20.0

    def test_divergence_aborts_with_diagnostic(self):
        with pytest.warns(UserWarning, match="coarse"):
            sc = Scenario(
                name="blowup",
                controller="stabilize",
                gains=ControlGains(1e8, 1e8),
                duration=5.0,
                step_size=1e-3,
                initial_state=GimbalState(0.0, 0.1, 0.0, 0.1),
            )
        with pytest.raises(SimulationDiverged, match="non-finite"):
            integrate(sc)

    def test_stabilize_ignores_references(self):
        base = replace(preset("fig3-stab"), duration=1.0, name="st0")
        with_refs = replace(
            base,
            ref_q=ReferenceSpec(kind="sinusoid", amplitude=0.5, omega=1.0),
            name="st1",
        )
        assert np.array_equal(integrate(base).data, integrate(with_refs).data)

    def test_guard_flag_recorded(self, rec_fig5):
        # the sinusoid scenario passes near gimbal lock once
        assert rec_fig5.guard_active.any()
        x1 = rec_fig5.col("x1")[rec_fig5.guard_active]
        assert np.all(np.abs(np.cos(x1)) < rec_fig5.scenario.guard.threshold)


class TestPresets:
    def test_names_and_descriptions(self):
        names = preset_names()
        assert "fig3-stab" in names and "fig5-sin-noise" in names
        assert len(names) == 7
        for n in names:
            assert preset_description(n)

    def test_unknown_preset_lists_valid_names(self):
        with pytest.raises(UnknownPresetError, match="fig4-step"):
            preset("fig9-nope")

    def test_stabilization_gains_and_initial_rates(self):
        sc = preset("fig3-stab")
        assert (sc.gains.c1, sc.gains.c2) == (3.0, 4.0)
        assert sc.controller == "stabilize"
        assert sc.initial_state.x2 == 0.2 and sc.initial_state.x4 == 0.2
        assert not sc.noise.enabled

    def test_noise_preset_raises_gains(self):
        sc = preset("fig3-stab-noise")
        assert (sc.gains.c1, sc.gains.c2) == (20.0, 16.0)
        assert sc.noise.enabled

    def test_step_preset(self):
        sc = preset("fig4-step")
        assert (sc.gains.c1, sc.gains.c2, sc.gains.c3, sc.gains.c4) == (6.0, 8.0, 9.0, 10.0)
        assert sc.ref_q.kind == "step" and sc.ref_q.amplitude == pytest.approx(math.pi / 6)
        assert sc.ref_r.amplitude == pytest.approx(math.pi / 3)
        assert sc.ref_q.t_off - sc.ref_q.t_on == pytest.approx(20.0)
        assert preset("fig4-step-noise").noise.enabled

    def test_sinusoid_preset(self):
        sc = preset("fig5-sin")
        assert (sc.gains.c1, sc.gains.c2, sc.gains.c3, sc.gains.c4) == (8.0, 10.0, 6.0, 8.0)
        for ref in (sc.ref_q, sc.ref_r):
            assert ref.kind == "sinusoid"
            assert ref.amplitude == 1.0
            assert ref.omega == pytest.approx(math.pi / 25)

    def test_pid_preset_uses_same_references(self):
        sc = preset("fig4-step-pid")
        assert sc.controller == "pid"
        assert sc.ref_q == preset("fig4-step").ref_q


class TestAnalysisHelpers:
    def test_fit_decay_slope_on_synthetic_exponential(self):
        t = np.linspace(0.0, 10.0, 4001)
        e = 0.5 * np.exp(-2.0 * t)
        fit = fit_decay_slope(t, e, floor=1e-6)
        assert fit.slope == pytest.approx(-2.0, rel=1e-6)
        # window ends where 0.5 exp(-2t) crosses the 1e-6 floor
        assert fit.t_end == pytest.approx(math.log(0.5 / 1e-6) / 2.0, abs=0.01)

    def test_fit_window_stops_at_floor(self):
        t = np.linspace(0.0, 10.0, 1001)
        e = np.maximum(0.5 * np.exp(-2.0 * t), 2e-6)
        fit = fit_decay_slope(t, e, floor=3e-6)
        # window must end when the signal hits the floor region
        assert fit.t_end <= math.log(0.5 / 3e-6) / 2.0 + 0.1

    def test_fit_rejects_empty_window(self):
        with pytest.raises(ValueError):
            fit_decay_slope(np.array([0.0, 1.0]), np.array([0.0, 0.0]))

    def test_settling_time(self):
        t = np.linspace(0.0, 10.0, 1001)
        y = 1.0 - np.exp(-t)
        ts = settling_time(t, y, 1.0, band=0.02)
        assert ts == pytest.approx(math.log(1 / 0.02), abs=0.02)

    def test_settling_never(self):
        t = np.linspace(0.0, 1.0, 101)
        assert settling_time(t, np.ones_like(t), 0.0, band=0.5) == math.inf

    def test_settling_immediately(self):
        t = np.linspace(0.0, 1.0, 101)
        assert settling_time(t, np.zeros_like(t), 0.0, band=0.5) == 0.0

    def test_rms_and_iae(self):
        t = np.array([0.0, 1.0, 2.0])
        e = np.array([1.0, -1.0, 1.0])
        assert rms(e) == 1.0
        assert integrated_abs_error(t, e) == pytest.approx(2.0)
        assert peak_abs_error(e) == 1.0
