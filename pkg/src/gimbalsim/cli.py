"""Command line front end: run scenarios, verify library properties,
compare presets.

Subcommands:

- ``run``      integrate a preset or config-file scenario; writes
  ``trace.csv`` (one row per step, columns as in ``sim.COLUMNS``),
  ``scenario.resolved`` (the fully resolved scenario in config format)
  and, with ``--plots``, self-contained SVG line charts.
- ``verify``   randomized and simulation-based self checks with
  per-check margins; exits 0 iff all pass.
- ``compare``  run two presets and print settling / peak / integrated
  error per channel.
- ``presets``  list the bundled scenarios.

The default output root is ``$GIMBAL_OUT_DIR`` (falling back to
``./runs``), with one subdirectory per scenario name.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import math
import os
import random
import sys
from dataclasses import replace
from pathlib import Path
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import __version__
from .control import ControlGains, GuardSpec, PidParams, torques_from_virtual, virtual_from_torques
from .kinematics import BodyRates, los_rates, yaw_rates, GimbalAngles
from .plant import (
    GimbalState,
    InertiaModel,
    NoiseSpec,
    TorqueCommand,
    default_model,
    pitch_accel_drift,
    yaw_accel_drift,
)
from .control import azimuth_drift, elevation_drift
from .sim import (
    COLUMNS,
    ConstantPlatform,
    PlatformProfile,
    ReferenceSpec,
    Scenario,
    SimRecord,
    SimulationDiverged,
    SinusoidalPlatform,
    TablePlatform,
    UnknownPresetError,
    fit_decay_slope,
    integrate,
    integrated_abs_error,
    peak_abs_error,
    preset,
    preset_description,
    preset_names,
)

TRACE_FILENAME = "trace.csv"
RESOLVED_FILENAME = "scenario.resolved"


# ---------------------------------------------------------------------------
# Trace CSV


def _fmt(x: float) -> str:
    return format(x, ".17g")


def write_trace_csv(record: SimRecord, path: Path | str) -> None:
    """Write the trace with a header row, 17 significant digits per
    value (lossless for float64), '.' decimal separator, newline
    terminated."""
    data = record.data
    with open(path, "w", newline="\n") as f:
        f.write(",".join(COLUMNS) + "\n")
        for row in data:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def read_trace_csv(path: Path | str) -> tuple[tuple[str, ...], np.ndarray]:
    """Parse a trace written by :func:`write_trace_csv`; exact inverse."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = tuple(next(reader))
        rows = [[float(cell) for cell in row] for row in reader if row]
    return header, np.array(rows, dtype=float)


# ---------------------------------------------------------------------------
# Scenario <-> config text (flat INI sections)


def scenario_to_ini(sc: Scenario) -> str:
    cp = configparser.ConfigParser()
    cp["scenario"] = {
        "name": sc.name,
        "controller": sc.controller,
        "duration": _fmt(sc.duration),
        "step_size": _fmt(sc.step_size),
    }
    cp["initial"] = {
        name: _fmt(getattr(sc.initial_state, name))
        for name in ("x1", "x2", "x3", "x4", "theta_q", "theta_r")
    }
    plat = sc.platform
    if isinstance(plat, SinusoidalPlatform):
        cp["platform"] = {
            "kind": "sinusoidal",
            **{
                k: _fmt(getattr(plat, k))
                for k in ("amp_p", "omega_p", "amp_q", "omega_q", "amp_r", "omega_r")
            },
        }
    elif isinstance(plat, ConstantPlatform):
        cp["platform"] = {
            "kind": "constant",
            "p": _fmt(plat.p),
            "q": _fmt(plat.q),
            "r": _fmt(plat.r),
        }
    elif isinstance(plat, TablePlatform):
        cp["platform"] = {
            "kind": "custom-table",
            **{
                k: ", ".join(_fmt(v) for v in getattr(plat, k))
                for k in ("times", "p", "q", "r")
            },
        }
    else:
        raise ValueError(f"cannot serialize platform {type(plat).__name__}")
    a, k = sc.model.pitch_gimbal, sc.model.yaw_gimbal
    cp["inertia"] = {
        "pitch_xx": _fmt(a[0, 0]), "pitch_yy": _fmt(a[1, 1]), "pitch_zz": _fmt(a[2, 2]),
        "pitch_xy": _fmt(a[0, 1]), "pitch_xz": _fmt(a[0, 2]), "pitch_yz": _fmt(a[1, 2]),
        "yaw_xx": _fmt(k[0, 0]), "yaw_yy": _fmt(k[1, 1]), "yaw_zz": _fmt(k[2, 2]),
        "yaw_xy": _fmt(k[0, 1]), "yaw_xz": _fmt(k[0, 2]), "yaw_yz": _fmt(k[1, 2]),
    }
    if sc.gains is not None:
        g = {"c1": _fmt(sc.gains.c1), "c2": _fmt(sc.gains.c2)}
        if sc.gains.c3 is not None:
            g["c3"] = _fmt(sc.gains.c3)
        if sc.gains.c4 is not None:
            g["c4"] = _fmt(sc.gains.c4)
        cp["gains"] = g
    for section, ref in (("reference_q", sc.ref_q), ("reference_r", sc.ref_r)):
        cp[section] = {
            "kind": ref.kind,
            "amplitude": _fmt(ref.amplitude),
            "omega": _fmt(ref.omega),
            "t_on": _fmt(ref.t_on),
            "t_off": _fmt(ref.t_off),
        }
    cp["noise"] = {
        "enabled": str(sc.noise.enabled).lower(),
        "sigma_y": _fmt(sc.noise.sigma_y),
        "sigma_z": _fmt(sc.noise.sigma_z),
        "seed": str(sc.noise.seed),
    }
    cp["guard"] = {"threshold": _fmt(sc.guard.threshold)}
    cp["pid"] = {
        name: _fmt(getattr(sc.pid, name))
        for name in ("kp_q", "ki_q", "kd_q", "kp_r", "ki_r", "kd_r")
    }
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def _floats(raw: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in raw.replace(",", " ").split())


def scenario_from_ini(text: str) -> Scenario:
    cp = configparser.ConfigParser()
    cp.read_string(text)
    base = Scenario(controller="open-loop")  # field defaults

    s = cp["scenario"] if cp.has_section("scenario") else {}
    name = s.get("name", "custom")
    controller = s.get("controller", "open-loop")
    duration = float(s.get("duration", base.duration))
    step_size = float(s.get("step_size", base.step_size))

    init = base.initial_state
    if cp.has_section("initial"):
        sec = cp["initial"]
        init = GimbalState(
            *(float(sec.get(k, 0.0)) for k in ("x1", "x2", "x3", "x4", "theta_q", "theta_r"))
        )

    platform: PlatformProfile = base.platform
    if cp.has_section("platform"):
        sec = cp["platform"]
        kind = sec.get("kind", "sinusoidal")
        if kind == "sinusoidal":
            defaults = SinusoidalPlatform()
            platform = SinusoidalPlatform(
                *(
                    float(sec.get(k, getattr(defaults, k)))
                    for k in ("amp_p", "omega_p", "amp_q", "omega_q", "amp_r", "omega_r")
                )
            )
        elif kind == "constant":
            platform = ConstantPlatform(
                float(sec.get("p", 0.0)), float(sec.get("q", 0.0)), float(sec.get("r", 0.0))
            )
        elif kind == "custom-table":
            platform = TablePlatform(
                _floats(sec["times"]), _floats(sec["p"]), _floats(sec["q"]), _floats(sec["r"])
            )
        else:
            raise ValueError(f"unknown platform kind {kind!r}")

    model = base.model
    if cp.has_section("inertia"):
        sec = cp["inertia"]
        gv = lambda key, default: float(sec.get(key, default))
        axx, ayy, azz = gv("pitch_xx", 0.003), gv("pitch_yy", 0.008), gv("pitch_zz", 0.003)
        axy, axz, ayz = gv("pitch_xy", 0.0), gv("pitch_xz", 0.0), gv("pitch_yz", 0.0)
        kxx, kyy, kzz = gv("yaw_xx", 0.003), gv("yaw_yy", 0.006), gv("yaw_zz", 0.0003)
        kxy, kxz, kyz = gv("yaw_xy", 0.0), gv("yaw_xz", 0.0), gv("yaw_yz", 0.0)
        model = InertiaModel(
            pitch_gimbal=np.array(
                [[axx, axy, axz], [axy, ayy, ayz], [axz, ayz, azz]]
            ),
            yaw_gimbal=np.array(
                [[kxx, kxy, kxz], [kxy, kyy, kyz], [kxz, kyz, kzz]]
            ),
        )

    gains = None
    if cp.has_section("gains"):
        sec = cp["gains"]
        gains = ControlGains(
            float(sec["c1"]),
            float(sec["c2"]),
            float(sec["c3"]) if "c3" in sec else None,
            float(sec["c4"]) if "c4" in sec else None,
        )

    refs = {}
    for section in ("reference_q", "reference_r"):
        if cp.has_section(section):
            sec = cp[section]
            refs[section] = ReferenceSpec(
                kind=sec.get("kind", "zero"),
                amplitude=float(sec.get("amplitude", 0.0)),
                omega=float(sec.get("omega", 0.0)),
                t_on=float(sec.get("t_on", 0.0)),
                t_off=float(sec.get("t_off", "inf")),
            )
        else:
            refs[section] = ReferenceSpec()

    noise = base.noise
    if cp.has_section("noise"):
        sec = cp["noise"]
        noise = NoiseSpec(
            enabled=sec.getboolean("enabled", False),
            sigma_y=float(sec.get("sigma_y", 0.002)),
            sigma_z=float(sec.get("sigma_z", 0.002)),
            seed=int(sec.get("seed", 1234)),
        )

    guard = base.guard
    if cp.has_section("guard"):
        guard = GuardSpec(threshold=float(cp["guard"].get("threshold", 0.3)))

    pid = base.pid
    if cp.has_section("pid"):
        sec = cp["pid"]
        dflt = PidParams()
        pid = PidParams(
            *(
                float(sec.get(k, getattr(dflt, k)))
                for k in ("kp_q", "ki_q", "kd_q", "kp_r", "ki_r", "kd_r")
            )
        )

    return Scenario(
        name=name,
        controller=controller,
        duration=duration,
        step_size=step_size,
        initial_state=init,
        platform=platform,
        model=model,
        gains=gains,
        ref_q=refs["reference_q"],
        ref_r=refs["reference_r"],
        noise=noise,
        guard=guard,
        pid=pid,
    )


# ---------------------------------------------------------------------------
# SVG line charts (no plotting dependency)

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return ticks


def write_svg_chart(
    path: Path | str,
    title: str,
    xlabel: str,
    ylabel: str,
    series: Sequence[tuple[str, np.ndarray, np.ndarray]],
    dashed: Sequence[str] = (),
) -> None:
    """Write a time-series line chart as a standalone SVG file.

    ``series`` is a sequence of (label, x, y); labels listed in
    ``dashed`` render with a dash pattern (used for references).
    """
    width, height = 880, 520
    ml, mr, mt, mb = 72, 24, 44, 56
    pw, ph = width - ml - mr, height - mt - mb

    xs = np.concatenate([np.asarray(x, float) for _, x, _ in series])
    ys = np.concatenate([np.asarray(y, float) for _, _, y in series])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 1.0, y1 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(x: float) -> float:
        return ml + (x - x0) / (x1 - x0) * pw

    def py(y: float) -> float:
        return mt + (y1 - y) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="13">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="24" text-anchor="middle" font-size="16">{title}</text>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
    ]
    for tx in _nice_ticks(x0, x1):
        X = px(tx)
        out.append(f'<line x1="{X:.1f}" y1="{mt + ph}" x2="{X:.1f}" y2="{mt + ph + 5}" stroke="#444"/>')
        out.append(f'<line x1="{X:.1f}" y1="{mt}" x2="{X:.1f}" y2="{mt + ph}" stroke="#ddd"/>')
        out.append(
            f'<text x="{X:.1f}" y="{mt + ph + 20}" text-anchor="middle">{tx:g}</text>'
        )
    for ty in _nice_ticks(y0, y1):
        Y = py(ty)
        out.append(f'<line x1="{ml - 5}" y1="{Y:.1f}" x2="{ml}" y2="{Y:.1f}" stroke="#444"/>')
        out.append(f'<line x1="{ml}" y1="{Y:.1f}" x2="{ml + pw}" y2="{Y:.1f}" stroke="#ddd"/>')
        out.append(
            f'<text x="{ml - 9}" y="{Y + 4:.1f}" text-anchor="end">{ty:g}</text>'
        )
    out.append(
        f'<text x="{ml + pw / 2:.0f}" y="{height - 14}" text-anchor="middle">{xlabel}</text>'
    )
    out.append(
        f'<text x="20" y="{mt + ph / 2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 20 {mt + ph / 2:.0f})">{ylabel}</text>'
    )
    for i, (label, x, y) in enumerate(series):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        stride = max(1, len(x) // 2000)
        pts = " ".join(
            f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[::stride], y[::stride])
        )
        color = _PALETTE[i % len(_PALETTE)]
        dash = ' stroke-dasharray="7 5"' if label in dashed else ""
        out.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.6"{dash} points="{pts}"/>'
        )
        lx, lyy = ml + pw - 150, mt + 18 + 18 * i
        out.append(
            f'<line x1="{lx}" y1="{lyy - 4}" x2="{lx + 26}" y2="{lyy - 4}" '
            f'stroke="{color}" stroke-width="2"{dash}/>'
        )
        out.append(f'<text x="{lx + 32}" y="{lyy}">{label}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")


def emit_plots(record: SimRecord, outdir: Path) -> list[Path]:
    """Write the standard set of charts for a run."""
    sc = record.scenario
    t = record.t
    stride = max(1, record.n_rows // 4000)
    ts = t[::stride]
    body = [sc.platform.rates(float(x)) for x in ts]
    paths = []

    def emit(name, title, ylabel, series, dashed=()):
        p = outdir / name
        write_svg_chart(p, title, "time [s]", ylabel, series, dashed)
        paths.append(p)

    emit(
        "platform.svg",
        "platform body rates",
        "rate [rad/s]",
        [
            ("p", ts, np.array([b.p for b in body])),
            ("q", ts, np.array([b.q for b in body])),
            ("r", ts, np.array([b.r for b in body])),
        ],
    )
    emit(
        "rates.svg",
        f"LOS rates ({sc.name})",
        "rate [rad/s]",
        [("q_a", t, record.q_a), ("r_a", t, record.r_a)],
    )
    angle_series = [
        ("theta_q", t, record.theta_q),
        ("theta_r", t, record.theta_r),
    ]
    dashed = []
    if sc.controller in ("los-track", "pid"):
        trq, trr = sc.ref_q.trajectory(), sc.ref_r.trajectory()
        angle_series.append(("theta_q ref", ts, np.array([trq.value(float(x)) for x in ts])))
        angle_series.append(("theta_r ref", ts, np.array([trr.value(float(x)) for x in ts])))
        dashed = ["theta_q ref", "theta_r ref"]
    emit("los_angles.svg", f"LOS angles ({sc.name})", "angle [rad]", angle_series, dashed)
    emit(
        "torques.svg",
        f"motor torques ({sc.name})",
        "torque [N m]",
        [("u1", t, record.col("u1")), ("u2", t, record.col("u2"))],
    )
    return paths


# ---------------------------------------------------------------------------
# Verification suites


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def _random_symmetric_model(rng: random.Random) -> InertiaModel:
    ax = rng.uniform(1e-3, 2e-2)
    ay = rng.uniform(1e-3, 2e-2)
    kx = rng.uniform(1e-3, 2e-2)
    kz = rng.uniform(1e-4, 2e-2)
    return InertiaModel(
        pitch_gimbal=np.diag([ax, ay, ax]),
        yaw_gimbal=np.diag([kx, kx + ax, kz]),
    )


def _random_state(rng: random.Random) -> GimbalState:
    return GimbalState(
        rng.uniform(-math.pi, math.pi),
        rng.uniform(-2.0, 2.0),
        rng.uniform(-math.pi, math.pi),
        rng.uniform(-2.0, 2.0),
        rng.uniform(-1.0, 1.0),
        rng.uniform(-1.0, 1.0),
    )


def _random_body(rng: random.Random) -> BodyRates:
    return BodyRates(*(rng.uniform(-1.0, 1.0) for _ in range(6)))


def verify_roundtrip(samples: int = 10_000, seed: int = 20240) -> CheckResult:
    """Randomized check that the torque <-> virtual-acceleration maps
    are mutual inverses to better than 1e-12."""
    rng = random.Random(seed)
    from .control import VirtualControl

    worst = 0.0
    for _ in range(samples):
        t = rng.uniform(0.0, 60.0)
        st = _random_state(rng)
        body = _random_body(rng)
        model = _random_symmetric_model(rng)
        v = VirtualControl(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0))
        u = TorqueCommand(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05))
        v2 = virtual_from_torques(torques_from_virtual(v, t, st, body, model), t, st, body, model)
        u2 = torques_from_virtual(virtual_from_torques(u, t, st, body, model), t, st, body, model)
        worst = max(
            worst,
            abs(v2.v1 - v.v1),
            abs(v2.v2 - v.v2),
            abs(u2.u1 - u.u1),
            abs(u2.u2 - u.u2),
        )
    return CheckResult(
        "roundtrip",
        worst < 1e-12,
        f"max round-trip error {worst:.3e} over {samples} samples (tol 1e-12)",
    )


def verify_decay() -> list[CheckResult]:
    """Fit the stabilization preset's LOS rate decay against the gains."""
    sc = preset("fig3-stab")
    rec = integrate(sc)
    ok_guard = ~rec.guard_active
    results = []
    for channel, gain in (("q_a", sc.gains.c1), ("r_a", sc.gains.c2)):
        fit = fit_decay_slope(rec.t, rec.col(channel), floor=1e-6, valid=ok_guard)
        rel = abs(fit.slope + gain) / gain
        results.append(
            CheckResult(
                f"decay {channel}",
                rel <= 0.02,
                f"fitted slope {fit.slope:+.4f} vs -{gain:g} "
                f"({rel * 100:.2f}% off, tol 2%, {fit.n_points} pts to t={fit.t_end:.2f}s)",
            )
        )
    return results


class _SmoothSignal:
    """offset + drift*t + amp*sin(freq*t + phase), with derivatives."""

    def __init__(self, rng: random.Random, scale: float = 1.0):
        self.c0 = rng.uniform(-1.0, 1.0) * scale
        self.c1 = rng.uniform(-0.3, 0.3) * scale
        self.a = rng.uniform(-1.0, 1.0) * scale
        self.w = rng.uniform(0.3, 2.5)
        self.ph = rng.uniform(0.0, 2.0 * math.pi)

    def value(self, t: float) -> float:
        return self.c0 + self.c1 * t + self.a * math.sin(self.w * t + self.ph)

    def d1(self, t: float) -> float:
        return self.c1 + self.a * self.w * math.cos(self.w * t + self.ph)


class _SyntheticPath:
    """Analytic state/body trajectory for derivative oracles."""

    def __init__(self, rng: random.Random):
        self.sig_x1 = _SmoothSignal(rng)
        self.sig_x3 = _SmoothSignal(rng)
        self.sig_p = _SmoothSignal(rng, 0.5)
        self.sig_q = _SmoothSignal(rng, 0.5)
        self.sig_r = _SmoothSignal(rng, 0.5)

    def state(self, t: float) -> GimbalState:
        return GimbalState(
            self.sig_x1.value(t),
            self.sig_x1.d1(t),
            self.sig_x3.value(t),
            self.sig_x3.d1(t),
        )

    def body(self, t: float) -> BodyRates:
        return BodyRates(
            self.sig_p.value(t),
            self.sig_q.value(t),
            self.sig_r.value(t),
            self.sig_p.d1(t),
            self.sig_q.d1(t),
            self.sig_r.d1(t),
        )

    def x4_dot(self, t: float) -> float:
        s = self.sig_x3
        return -s.a * s.w * s.w * math.sin(s.w * t + s.ph)


def _central_diff(f: Callable[[float], float], t: float, h: float) -> float:
    return (f(t + h) - f(t - h)) / (2.0 * h)


def verify_oracle(
    trajectories: int = 10, fd_step: float = 1e-5, tol: float = 1e-5, seed: int = 77
) -> list[CheckResult]:
    """Independent checks of the drift terms.

    The pitch/elevation pair must cancel exactly. Each drift term is
    compared against a central finite difference of the quantity it is
    the analytic derivative of, along random smooth synthetic
    trajectories.
    """
    rng = random.Random(seed)
    worst_id = 0.0
    for _ in range(2000):
        st = _random_state(rng)
        body = _random_body(rng)
        t = rng.uniform(0.0, 10.0)
        worst_id = max(
            worst_id, abs(pitch_accel_drift(t, st, body) + elevation_drift(t, st, body))
        )
    results = [
        CheckResult(
            "oracle drift identity",
            worst_id == 0.0,
            f"max |pitch_accel_drift + elevation_drift| = {worst_id:.3e} (must be exactly 0)",
        )
    ]

    model = default_model()
    ratio = model.j_ay / model.j_k
    worst = {"pitch_accel_drift": 0.0, "yaw_accel_drift": 0.0,
             "elevation_drift": 0.0, "azimuth_drift": 0.0}
    for _ in range(trajectories):
        path = _SyntheticPath(rng)
        for _ in range(8):
            t = rng.uniform(1.0, 9.0)
            st = path.state(t)
            body = path.body(t)

            def qk_term(tt: float) -> float:
                s = path.state(tt)
                b = path.body(tt)
                return b.p * math.sin(s.x3) - b.q * math.cos(s.x3)

            fd = _central_diff(qk_term, t, fd_step)
            worst["pitch_accel_drift"] = max(
                worst["pitch_accel_drift"], abs(pitch_accel_drift(t, st, body) - fd)
            )
            worst["elevation_drift"] = max(
                worst["elevation_drift"], abs(elevation_drift(t, st, body) + fd)
            )

            r_dot_fd = _central_diff(lambda tt: path.body(tt).r, t, fd_step)
            yaw = yaw_rates(body, GimbalAngles(nu1=st.x3, nu2=st.x1, nu1_dot=st.x4, nu2_dot=st.x2))
            q_a, _ = los_rates(st, body)
            f2_fd = -r_dot_fd - ratio * yaw.about_x * q_a
            worst["yaw_accel_drift"] = max(
                worst["yaw_accel_drift"],
                abs(yaw_accel_drift(t, st, body, model) - f2_fd),
            )

            def azimuth_rate(tt: float) -> float:
                return los_rates(path.state(tt), path.body(tt))[1]

            g2_fd = _central_diff(azimuth_rate, t, fd_step) - path.x4_dot(t) * math.cos(st.x1)
            worst["azimuth_drift"] = max(
                worst["azimuth_drift"], abs(azimuth_drift(t, st, body) - g2_fd)
            )
    for name, err in worst.items():
        results.append(
            CheckResult(
                f"oracle {name} finite-difference",
                err < tol,
                f"max deviation {err:.3e} (tol {tol:g}, step {fd_step:g}, "
                f"{trajectories} trajectories)",
            )
        )
    return results


def run_verify_suite(suite: str) -> list[CheckResult]:
    if suite in ("roundtrip", "lemma1"):
        return [verify_roundtrip()]
    if suite == "decay":
        return verify_decay()
    if suite == "oracle":
        return verify_oracle()
    if suite == "all":
        return [verify_roundtrip(), *verify_decay(), *verify_oracle()]
    raise ValueError(f"unknown verify suite {suite!r}")


# ---------------------------------------------------------------------------
# Compare


class ChannelMetrics(NamedTuple):
    settling: float
    peak_error: float
    iae: float


def run_metrics(record: SimRecord) -> dict[str, ChannelMetrics]:
    """Per-channel tracking metrics against the scenario references.

    The settling time is measured from run start to the last excursion
    of the error outside a 2% band of the reference peak (absolute band
    0.02 when the reference is identically zero).
    """
    sc = record.scenario
    t = record.t
    out = {}
    for channel, ref in (("theta_q", sc.ref_q), ("theta_r", sc.ref_r)):
        traj = ref.trajectory()
        target = np.array([traj.value(float(x)) for x in t])
        e = target - record.col(channel)
        peak_ref = float(np.max(np.abs(target)))
        band = 0.02 * peak_ref if peak_ref > 0.0 else 0.02
        out[channel] = ChannelMetrics(
            settling=_settling_against(t, e, band),
            peak_error=peak_abs_error(e),
            iae=integrated_abs_error(t, e),
        )
    return out


def _settling_against(t: np.ndarray, e: np.ndarray, band: float) -> float:
    viol = np.nonzero(np.abs(e) > band)[0]
    if viol.size == 0:
        return 0.0
    if viol[-1] == len(t) - 1:
        return math.inf
    return float(t[viol[-1] + 1])


# ---------------------------------------------------------------------------
# Commands


def _resolve_outdir(arg_out: str | None, name: str) -> Path:
    if arg_out:
        return Path(arg_out)
    root = os.environ.get("GIMBAL_OUT_DIR", "runs")
    return Path(root) / name


def _load_scenario(args) -> Scenario:
    if args.preset:
        sc = preset(args.preset)
    else:
        sc = scenario_from_ini(Path(args.config).read_text())
    if args.step_size is not None:
        sc = replace(sc, step_size=args.step_size)
    if args.seed is not None:
        sc = replace(sc, noise=replace(sc.noise, seed=args.seed))
    return sc


def cmd_run(args) -> int:
    try:
        sc = _load_scenario(args)
    except (UnknownPresetError, ValueError, OSError, KeyError, configparser.Error) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    outdir = _resolve_outdir(args.out, sc.name)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        print(f"error: cannot create output directory: {e}", file=sys.stderr)
        return 2
    try:
        record = integrate(sc)
    except SimulationDiverged as e:
        print(f"error: simulation diverged: {e}", file=sys.stderr)
        return 2
    write_trace_csv(record, outdir / TRACE_FILENAME)
    (outdir / RESOLVED_FILENAME).write_text(scenario_to_ini(record.scenario))
    written = [outdir / TRACE_FILENAME, outdir / RESOLVED_FILENAME]
    if args.plots:
        written += emit_plots(record, outdir)
    print(f"{sc.name}: {record.n_rows} rows over {sc.duration:g}s (h={sc.step_size:g})")
    for p in written:
        print(f"  wrote {p}")
    return 0


def cmd_verify(args) -> int:
    try:
        results = run_verify_suite(args.suite)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    all_ok = True
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        all_ok &= r.passed
        print(f"{status} {r.name}: {r.detail}")
    return 0 if all_ok else 1


def cmd_compare(args) -> int:
    try:
        rec_a = integrate(preset(args.preset_a))
        rec_b = integrate(preset(args.preset_b))
    except (UnknownPresetError, SimulationDiverged) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    ma, mb = run_metrics(rec_a), run_metrics(rec_b)

    def fmt_t(v: float) -> str:
        return "never" if math.isinf(v) else f"{v:.3f}"

    name_a, name_b = args.preset_a, args.preset_b
    print(f"{'metric':<28} {name_a:>18} {name_b:>18}")
    for channel in ("theta_q", "theta_r"):
        a, b = ma[channel], mb[channel]
        print(f"{channel + ' settling [s]':<28} {fmt_t(a.settling):>18} {fmt_t(b.settling):>18}")
        print(f"{channel + ' peak error [rad]':<28} {a.peak_error:>18.6g} {b.peak_error:>18.6g}")
        print(f"{channel + ' IAE [rad s]':<28} {a.iae:>18.6g} {b.iae:>18.6g}")
    return 0


def cmd_presets(args) -> int:
    for name in preset_names():
        print(f"{name:<18} {preset_description(name)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gimbalsim",
        description="Two-axis gimbal LOS stabilization/tracking simulator",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate a scenario and write artifacts")
    src = p_run.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", help="bundled scenario name (see 'presets')")
    src.add_argument("--config", help="scenario config file (INI sections)")
    p_run.add_argument("--out", help="output directory (default $GIMBAL_OUT_DIR/<name>)")
    p_run.add_argument("--seed", type=int, help="override the noise seed")
    p_run.add_argument("--step-size", type=float, help="override the integrator step [s]")
    p_run.add_argument("--plots", action="store_true", help="also write SVG charts")
    p_run.set_defaults(func=cmd_run)

    p_verify = sub.add_parser("verify", help="run self-check suites")
    p_verify.add_argument(
        "suite",
        choices=("roundtrip", "lemma1", "decay", "oracle", "all"),
        help="which suite to run ('lemma1' is an alias of 'roundtrip')",
    )
    p_verify.set_defaults(func=cmd_verify)

    p_cmp = sub.add_parser("compare", help="run two presets and compare tracking metrics")
    p_cmp.add_argument("preset_a")
    p_cmp.add_argument("preset_b")
    p_cmp.set_defaults(func=cmd_compare)

    p_presets = sub.add_parser("presets", help="list bundled scenarios")
    p_presets.set_defaults(func=cmd_presets)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
