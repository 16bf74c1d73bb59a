"""Deterministic closed-loop simulation of the gimbal.

A :class:`Scenario` bundles everything one run needs: duration and step
size, initial state, platform motion profile, controller selection with
gains, reference signals, noise and guard settings. ``integrate`` runs
classical fixed-step RK4 on the six-state augmented plant with the
control recomputed once per macro-step and held across the four stages
(zero-order hold); torque noise, when enabled, is drawn once per
macro-step and held the same way. Identical scenarios (including the
noise seed) produce bit-identical traces.

``preset`` returns ready-made scenarios reproducing the bundled
stabilization and tracking studies. Analysis helpers (decay-slope fit,
settling time, RMS, integrated absolute error) operate on the recorded
traces.
"""

from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .control import (
    ControlGains,
    DesiredTrajectory,
    GuardSpec,
    PidParams,
    PidState,
    ZERO_TRAJECTORY,
    los_tracking_control,
    pid_baseline,
    rate_tracking_control,
    torques_from_virtual,
)
from .kinematics import BodyRates, los_rates
from .plant import (
    GimbalState,
    InertiaModel,
    NoiseSpec,
    _rhs,
    default_model,
)

__all__ = [
    "COLUMNS",
    "CONTROLLERS",
    "SimulationDiverged",
    "UnknownPresetError",
    "PlatformProfile",
    "SinusoidalPlatform",
    "ConstantPlatform",
    "TablePlatform",
    "platform_rates",
    "ReferenceSpec",
    "make_reference",
    "Scenario",
    "SimRecord",
    "integrate",
    "preset",
    "preset_names",
    "preset_description",
    "fit_decay_slope",
    "DecayFit",
    "settling_time",
    "rms",
    "integrated_abs_error",
    "peak_abs_error",
]

COLUMNS = (
    "t",
    "x1",
    "x2",
    "x3",
    "x4",
    "theta_q",
    "theta_r",
    "q_a",
    "r_a",
    "v1",
    "v2",
    "u1",
    "u2",
    "guard_active",
    "noise_y",
    "noise_z",
)

CONTROLLERS = ("stabilize", "rate-track", "los-track", "pid", "open-loop")


class SimulationDiverged(RuntimeError):
    """A state component became non-finite during integration."""

    def __init__(self, t: float, state: GimbalState):
        self.t = t
        self.state = state
        super().__init__(f"non-finite state at t={t:.6g}: {state}")


class UnknownPresetError(ValueError):
    def __init__(self, name: str):
        valid = ", ".join(preset_names())
        super().__init__(f"unknown preset {name!r}; valid presets: {valid}")


# ---------------------------------------------------------------------------
# Platform motion profiles


class PlatformProfile:
    """Base: supplies body rates and their exact time derivatives."""

    kind = "abstract"

    def rates(self, t: float) -> BodyRates:
        raise NotImplementedError


@dataclass(frozen=True)
class SinusoidalPlatform(PlatformProfile):
    """Sinusoidal body rates per channel: A sin(omega t), with analytic
    derivatives. Defaults are the motion profile used by the presets."""

    amp_p: float = 0.1
    omega_p: float = math.pi / 15
    amp_q: float = 0.1
    omega_q: float = math.pi / 20
    amp_r: float = 0.2
    omega_r: float = math.pi / 15

    kind = "sinusoidal"

    def rates(self, t: float) -> BodyRates:
        return BodyRates(
            self.amp_p * math.sin(self.omega_p * t),
            self.amp_q * math.sin(self.omega_q * t),
            self.amp_r * math.sin(self.omega_r * t),
            self.amp_p * self.omega_p * math.cos(self.omega_p * t),
            self.amp_q * self.omega_q * math.cos(self.omega_q * t),
            self.amp_r * self.omega_r * math.cos(self.omega_r * t),
        )


@dataclass(frozen=True)
class ConstantPlatform(PlatformProfile):
    """Constant body rates (derivatives identically zero)."""

    p: float = 0.0
    q: float = 0.0
    r: float = 0.0

    kind = "constant"

    def rates(self, t: float) -> BodyRates:
        return BodyRates(self.p, self.q, self.r)


@dataclass(frozen=True)
class TablePlatform(PlatformProfile):
    """Piecewise-linear body rates from a time-indexed table.

    Rates interpolate linearly between breakpoints; the reported
    derivatives are the segment slopes (consistent with the
    interpolant). Outside the table range the end values hold with zero
    derivative.
    """

    times: tuple[float, ...]
    p: tuple[float, ...]
    q: tuple[float, ...]
    r: tuple[float, ...]

    kind = "custom-table"

    def __post_init__(self):
        n = len(self.times)
        if n < 2 or any(len(ch) != n for ch in (self.p, self.q, self.r)):
            raise ValueError("table needs >= 2 breakpoints with matching channel lengths")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("table times must be strictly increasing")

    def rates(self, t: float) -> BodyRates:
        ts = self.times
        if t <= ts[0]:
            return BodyRates(self.p[0], self.q[0], self.r[0])
        if t >= ts[-1]:
            return BodyRates(self.p[-1], self.q[-1], self.r[-1])
        i = 1
        while ts[i] < t:  # tables are short; linear scan is fine
            i += 1
        dt = ts[i] - ts[i - 1]
        w = (t - ts[i - 1]) / dt
        out = []
        for ch in (self.p, self.q, self.r):
            out.append(ch[i - 1] + w * (ch[i] - ch[i - 1]))
        for ch in (self.p, self.q, self.r):
            out.append((ch[i] - ch[i - 1]) / dt)
        return BodyRates(*out)


def platform_rates(profile: PlatformProfile, t: float) -> BodyRates:
    """Body rates and derivatives of ``profile`` at time ``t`` (t >= 0)."""
    return profile.rates(t)


# ---------------------------------------------------------------------------
# Reference trajectories


@dataclass(frozen=True)
class ReferenceSpec:
    """Declarative reference signal; ``trajectory()`` realizes it.

    Kinds: ``zero``; ``step`` (value ``amplitude`` on [t_on, t_off),
    zero outside, zero declared derivatives); ``sinusoid``
    (A sin(omega t) with analytic derivatives).
    """

    kind: str = "zero"
    amplitude: float = 0.0
    omega: float = 0.0
    t_on: float = 0.0
    t_off: float = math.inf

    def __post_init__(self):
        if self.kind not in ("zero", "step", "sinusoid"):
            raise ValueError(f"unknown reference kind {self.kind!r}")
        for name in ("amplitude", "omega", "t_on"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"reference {name} must be finite")

    def trajectory(self) -> DesiredTrajectory:
        if self.kind == "zero":
            return ZERO_TRAJECTORY
        if self.kind == "step":
            a, on, off = self.amplitude, self.t_on, self.t_off

            def value(t: float) -> float:
                return a if on <= t < off else 0.0

            zero = ZERO_TRAJECTORY.d1
            return DesiredTrajectory(value, zero, zero)
        a, w = self.amplitude, self.omega
        return DesiredTrajectory(
            lambda t: a * math.sin(w * t),
            lambda t: a * w * math.cos(w * t),
            lambda t: -a * w * w * math.sin(w * t),
        )


def make_reference(kind: str, **params) -> DesiredTrajectory:
    """Build a reference trajectory; see :class:`ReferenceSpec` for kinds
    and parameters."""
    return ReferenceSpec(kind=kind, **params).trajectory()


# ---------------------------------------------------------------------------
# Scenario


@dataclass(frozen=True)
class Scenario:
    """Complete description of one closed-loop run."""

    name: str = "custom"
    controller: str = "stabilize"
    duration: float = 60.0
    step_size: float = 1e-3
    initial_state: GimbalState = GimbalState(0.0, 0.0, 0.0, 0.0)
    platform: PlatformProfile = SinusoidalPlatform()
    model: InertiaModel = field(default_factory=default_model)
    gains: ControlGains | None = None
    ref_q: ReferenceSpec = ReferenceSpec()
    ref_r: ReferenceSpec = ReferenceSpec()
    noise: NoiseSpec = NoiseSpec()
    guard: GuardSpec = GuardSpec()
    pid: PidParams = PidParams()

    def __post_init__(self):
        if self.controller not in CONTROLLERS:
            raise ValueError(
                f"unknown controller {self.controller!r}; valid: {', '.join(CONTROLLERS)}"
            )
        if not (math.isfinite(self.duration) and self.duration > 0.0):
            raise ValueError("duration must be positive")
        if not (math.isfinite(self.step_size) and self.step_size > 0.0):
            raise ValueError("step_size must be positive")
        if self.controller in ("stabilize", "rate-track", "los-track"):
            if self.gains is None:
                raise ValueError(f"controller {self.controller!r} needs gains")
            if self.controller == "los-track":
                self.gains.require_full()
        if self.gains is not None:
            gmax = max(
                g for g in (self.gains.c1, self.gains.c2, self.gains.c3, self.gains.c4)
                if g is not None
            )
            if self.step_size * gmax > 0.1:
                warnings.warn(
                    f"step_size {self.step_size:g} is coarse for max gain {gmax:g}; "
                    "closed-loop time constant is poorly resolved",
                    stacklevel=2,
                )

    @property
    def n_steps(self) -> int:
        n = int(round(self.duration / self.step_size))
        if n < 1 or abs(n * self.step_size - self.duration) > 1e-9 * max(1.0, self.duration):
            raise ValueError("duration must be a whole number of steps")
        return n


# ---------------------------------------------------------------------------
# Trace record


@dataclass
class SimRecord:
    """Per-step trace of a run: one row per macro-step, columns
    :data:`COLUMNS`. ``v``/``u``/noise in a row are the commands and
    draws computed at that row's state (held over the following step)."""

    data: np.ndarray
    scenario: Scenario

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    def col(self, name: str) -> np.ndarray:
        return self.data[:, COLUMNS.index(name)]

    @property
    def t(self) -> np.ndarray:
        return self.col("t")

    @property
    def q_a(self) -> np.ndarray:
        return self.col("q_a")

    @property
    def r_a(self) -> np.ndarray:
        return self.col("r_a")

    @property
    def theta_q(self) -> np.ndarray:
        return self.col("theta_q")

    @property
    def theta_r(self) -> np.ndarray:
        return self.col("theta_r")

    @property
    def guard_active(self) -> np.ndarray:
        return self.col("guard_active") != 0.0

    def state_at(self, i: int) -> GimbalState:
        row = self.data[i]
        return GimbalState(*row[1:7])


# ---------------------------------------------------------------------------
# Integration


def integrate(scenario: Scenario) -> SimRecord:
    """Run the scenario and return its trace.

    Classical RK4 at fixed step on the augmented six-state plant. The
    controller output and any noise draw are computed from the state at
    each macro-step and held constant across the stage evaluations.
    Raises :class:`SimulationDiverged` if the state leaves the finite
    range.
    """
    sc = scenario
    model = sc.model
    if not model.symmetry:
        raise ValueError(
            "scenario model violates symmetric-design assumptions: "
            + "; ".join(model.symmetry.violations)
        )
    n = sc.n_steps
    h = sc.step_size
    j_ay, j_k = model.j_ay, model.j_k
    j_ratio = j_ay / j_k
    gthr = sc.guard.threshold
    rates = sc.platform.rates
    rec = np.empty((n + 1, len(COLUMNS)))

    x1, x2, x3, x4, tq, tr = sc.initial_state
    if not all(math.isfinite(v) for v in sc.initial_state):
        raise ValueError("initial state must be finite")

    noise_on = sc.noise.enabled
    gauss = random.Random(sc.noise.seed).gauss
    sig_y, sig_z = sc.noise.sigma_y, sc.noise.sigma_z

    gains, guard = sc.gains, sc.guard
    traj_q, traj_r = sc.ref_q.trajectory(), sc.ref_r.trajectory()
    pid_state = PidState()
    cos, isfinite = math.cos, math.isfinite

    kind = sc.controller
    if kind == "open-loop":

        def control_step(t, st, body):
            return 0.0, 0.0, 0.0, 0.0, 0.0
    elif kind == "pid":
        pid_params = sc.pid

        def control_step(t, st, body):
            nonlocal pid_state
            e_q = traj_q.value(t) - st.theta_q
            e_r = traj_r.value(t) - st.theta_r
            v, pid_state = pid_baseline(t, e_q, e_r, pid_params, pid_state)
            return v.v1, v.v2, j_ay * v.v1, j_k * v.v2, 0.0
    elif kind in ("stabilize", "rate-track"):
        if kind == "stabilize":  # stabilization is rate tracking of zero
            traj_q = traj_r = ZERO_TRAJECTORY

        def control_step(t, st, body):
            v = rate_tracking_control(t, st, body, gains, traj_q, traj_r, guard)
            u = torques_from_virtual(v, t, st, body, model)
            ga = 1.0 if abs(cos(st.x1)) < gthr else 0.0
            return v.v1, v.v2, u.u1, u.u2, ga
    else:  # los-track

        def control_step(t, st, body):
            v = los_tracking_control(
                t, st, body, gains, traj_q, traj_r, st.theta_q, st.theta_r, guard
            )
            u = torques_from_virtual(v, t, st, body, model)
            ga = 1.0 if abs(cos(st.x1)) < gthr else 0.0
            return v.v1, v.v2, u.u1, u.u2, ga

    half = 0.5 * h
    sixth = h / 6.0
    for k in range(n + 1):
        t = k * h
        body = rates(t)
        st = GimbalState(x1, x2, x3, x4, tq, tr)
        q_a, r_a = los_rates(st, body)
        v1, v2, u1, u2, ga = control_step(t, st, body)
        if noise_on:
            ny = gauss(0.0, sig_y)
            nz = gauss(0.0, sig_z)
        else:
            ny = nz = 0.0
        rec[k] = (t, x1, x2, x3, x4, tq, tr, q_a, r_a, v1, v2, u1, u2, ga, ny, nz)
        if k == n:
            break

        u1e = u1 + ny
        u2e = u2 + nz
        try:
            a1, a2, a3, a4, a5, a6 = _rhs(
                x1, x2, x3, x4, u1e, u2e,
                body.p, body.q, body.r, body.p_dot, body.q_dot, body.r_dot,
                j_ay, j_k, j_ratio,
            )
            bm = rates(t + half)
            b1, b2, b3, b4, b5, b6 = _rhs(
                x1 + half * a1, x2 + half * a2, x3 + half * a3, x4 + half * a4,
                u1e, u2e,
                bm.p, bm.q, bm.r, bm.p_dot, bm.q_dot, bm.r_dot,
                j_ay, j_k, j_ratio,
            )
            c1, c2, c3, c4, c5, c6 = _rhs(
                x1 + half * b1, x2 + half * b2, x3 + half * b3, x4 + half * b4,
                u1e, u2e,
                bm.p, bm.q, bm.r, bm.p_dot, bm.q_dot, bm.r_dot,
                j_ay, j_k, j_ratio,
            )
            be = rates(t + h)
            d1, d2, d3, d4, d5, d6 = _rhs(
                x1 + h * c1, x2 + h * c2, x3 + h * c3, x4 + h * c4,
                u1e, u2e,
                be.p, be.q, be.r, be.p_dot, be.q_dot, be.r_dot,
                j_ay, j_k, j_ratio,
            )
        except (ValueError, OverflowError) as exc:
            # trig of an overflowed stage state; same root cause as the
            # post-step finiteness check
            raise SimulationDiverged(t, GimbalState(x1, x2, x3, x4, tq, tr)) from exc
        x1 += sixth * (a1 + 2.0 * (b1 + c1) + d1)
        x2 += sixth * (a2 + 2.0 * (b2 + c2) + d2)
        x3 += sixth * (a3 + 2.0 * (b3 + c3) + d3)
        x4 += sixth * (a4 + 2.0 * (b4 + c4) + d4)
        tq += sixth * (a5 + 2.0 * (b5 + c5) + d5)
        tr += sixth * (a6 + 2.0 * (b6 + c6) + d6)
        if not (
            isfinite(x1) and isfinite(x2) and isfinite(x3)
            and isfinite(x4) and isfinite(tq) and isfinite(tr)
        ):
            raise SimulationDiverged(t + h, GimbalState(x1, x2, x3, x4, tq, tr))

    return SimRecord(rec, sc)


# ---------------------------------------------------------------------------
# Presets

_STEP_ON, _STEP_OFF = 5.0, 25.0  # step window; epoch is a project choice


def _presets() -> dict[str, tuple[str, Callable[[], Scenario]]]:
    sin25 = ReferenceSpec(kind="sinusoid", amplitude=1.0, omega=math.pi / 25)
    step_q = ReferenceSpec(
        kind="step", amplitude=math.pi / 6, t_on=_STEP_ON, t_off=_STEP_OFF
    )
    step_r = ReferenceSpec(
        kind="step", amplitude=math.pi / 3, t_on=_STEP_ON, t_off=_STEP_OFF
    )
    stab_x0 = GimbalState(0.0, 0.2, 0.0, 0.2)
    noise_on = NoiseSpec(enabled=True)
    return {
        "fig3-stab": (
            "LOS rate stabilization from 0.2 rad/s initial rates, gains (3, 4)",
            lambda: Scenario(
                name="fig3-stab",
                controller="stabilize",
                gains=ControlGains(3.0, 4.0),
                initial_state=stab_x0,
            ),
        ),
        "fig3-stab-noise": (
            "stabilization with torque noise, raised gains (20, 16)",
            lambda: Scenario(
                name="fig3-stab-noise",
                controller="stabilize",
                gains=ControlGains(20.0, 16.0),
                initial_state=stab_x0,
                noise=noise_on,
            ),
        ),
        "fig4-step": (
            "LOS angle step tracking (pi/6 elevation, pi/3 azimuth, 20 s window), "
            "gains (6, 8, 9, 10)",
            lambda: Scenario(
                name="fig4-step",
                controller="los-track",
                gains=ControlGains(6.0, 8.0, 9.0, 10.0),
                ref_q=step_q,
                ref_r=step_r,
            ),
        ),
        "fig4-step-noise": (
            "step tracking with torque noise",
            lambda: Scenario(
                name="fig4-step-noise",
                controller="los-track",
                gains=ControlGains(6.0, 8.0, 9.0, 10.0),
                ref_q=step_q,
                ref_r=step_r,
                noise=noise_on,
            ),
        ),
        "fig4-step-pid": (
            "step tracking with the PID baseline controller",
            lambda: Scenario(
                name="fig4-step-pid",
                controller="pid",
                ref_q=step_q,
                ref_r=step_r,
            ),
        ),
        "fig5-sin": (
            "LOS angle sinusoid tracking, sin(pi t/25) both channels, "
            "gains (8, 10, 6, 8)",
            lambda: Scenario(
                name="fig5-sin",
                controller="los-track",
                gains=ControlGains(8.0, 10.0, 6.0, 8.0),
                ref_q=sin25,
                ref_r=sin25,
            ),
        ),
        "fig5-sin-noise": (
            "sinusoid tracking with torque noise",
            lambda: Scenario(
                name="fig5-sin-noise",
                controller="los-track",
                gains=ControlGains(8.0, 10.0, 6.0, 8.0),
                ref_q=sin25,
                ref_r=sin25,
                noise=noise_on,
            ),
        ),
    }


_PRESETS = _presets()


def preset(name: str) -> Scenario:
    """The named bundled scenario; raises UnknownPresetError otherwise."""
    try:
        return _PRESETS[name][1]()
    except KeyError:
        raise UnknownPresetError(name) from None


def preset_names() -> tuple[str, ...]:
    return tuple(_PRESETS)


def preset_description(name: str) -> str:
    try:
        return _PRESETS[name][0]
    except KeyError:
        raise UnknownPresetError(name) from None


# ---------------------------------------------------------------------------
# Trace analysis


class DecayFit(NamedTuple):
    """Least-squares slope of log|e| vs t over the fitted window."""

    slope: float
    n_points: int
    t_end: float


def fit_decay_slope(
    t: np.ndarray,
    values: np.ndarray,
    floor: float = 1e-6,
    valid: np.ndarray | None = None,
) -> DecayFit:
    """Fit the exponential decay rate of ``|values|``.

    Uses the initial contiguous window in which ``|values| > floor``
    (and ``valid``, when given, holds); the fit stops at the first
    sample outside the window.
    """
    t = np.asarray(t, dtype=float)
    v = np.abs(np.asarray(values, dtype=float))
    ok = v > floor
    if valid is not None:
        ok = ok & valid
    if not ok[0]:
        raise ValueError("first sample is already outside the fit window")
    bad = np.nonzero(~ok)[0]
    n = int(bad[0]) if bad.size else len(ok)
    if n < 2:
        raise ValueError("fit window has fewer than two samples")
    slope = np.polyfit(t[:n], np.log(v[:n]), 1)[0]
    return DecayFit(float(slope), n, float(t[n - 1]))


def settling_time(
    t: np.ndarray,
    y: np.ndarray,
    target: float,
    band: float,
    t_start: float = 0.0,
    t_end: float | None = None,
) -> float:
    """Time after ``t_start`` from which ``|y - target|`` stays within
    ``band`` up to ``t_end`` (inf if it never settles)."""
    t = np.asarray(t, dtype=float)
    sel = t >= t_start
    if t_end is not None:
        sel &= t <= t_end
    ts = t[sel]
    err = np.abs(np.asarray(y, dtype=float)[sel] - target)
    if ts.size == 0:
        raise ValueError("empty settling window")
    viol = np.nonzero(err > band)[0]
    if viol.size == 0:
        return 0.0
    last = viol[-1]
    if last == ts.size - 1:
        return math.inf
    return float(ts[last + 1] - t_start)


def rms(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=float)
    return float(np.sqrt(np.mean(values * values)))


_trapezoid = getattr(np, "trapezoid", None) or np.trapz  # numpy < 2 fallback


def integrated_abs_error(t: np.ndarray, e: np.ndarray) -> float:
    """Trapezoidal integral of |e| over the trace."""
    return float(_trapezoid(np.abs(np.asarray(e, dtype=float)), np.asarray(t, dtype=float)))


def peak_abs_error(e: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(e, dtype=float))))
