"""Open-loop dynamics of a symmetric two-axis gimbal.

State vector (see :class:`GimbalState`): pitch angle and rate, yaw angle
and rate, plus the integrated LOS elevation and azimuth angles. Inputs
are the pitch- and yaw-axis motor torques. Platform body rates enter as
known functions of time (rate-gyro measurements), so the state
derivative is a function of ``(t, x, u)`` once a motion profile is
fixed.

The model assumes a symmetric gimbal with no mass unbalance: products
of inertia vanish, the inner gimbal has equal x/z moments, and the
outer y moment equals the sum of the inner and outer x moments.
``validate_symmetry`` reports violations of those conditions. Residual
design error can be represented as additive torque noise per channel
(:class:`NoiseSpec`); the realized draws are supplied by the simulation
loop, once per integrator macro-step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .kinematics import BodyRates

__all__ = [
    "GimbalState",
    "TorqueCommand",
    "InertiaModel",
    "NoiseSpec",
    "SymmetryReport",
    "default_model",
    "validate_symmetry",
    "pitch_accel_drift",
    "yaw_accel_drift",
    "state_derivative",
]


class GimbalState(NamedTuple):
    """Augmented gimbal state.

    ``x1`` pitch gimbal angle nu2 [rad], ``x2`` its rate [rad/s],
    ``x3`` yaw gimbal angle nu1 [rad], ``x4`` its rate [rad/s],
    ``theta_q`` / ``theta_r`` the LOS elevation / azimuth angles [rad],
    defined as the time integrals of the LOS rates ``q_a`` / ``r_a``.
    Angles accumulate (no wrapping). The same tuple shape doubles as the
    state-derivative container.
    """

    x1: float
    x2: float
    x3: float
    x4: float
    theta_q: float = 0.0
    theta_r: float = 0.0


class TorqueCommand(NamedTuple):
    """Motor torques: ``u1`` about the pitch axis, ``u2`` about the yaw
    axis [N m]."""

    u1: float
    u2: float


@dataclass(frozen=True, eq=False)
class InertiaModel:
    """Inertia matrices of the two gimbals plus the derived scalars.

    ``pitch_gimbal`` is the 3x3 inertia of the inner (pitch) gimbal,
    ``yaw_gimbal`` of the outer (yaw) gimbal, both in kg m^2. The pitch
    equation of motion uses ``j_ay`` (pitch-gimbal y moment); the yaw
    equation uses ``j_k`` (sum of both z moments, constant under the
    symmetric-design assumptions).
    """

    pitch_gimbal: np.ndarray
    yaw_gimbal: np.ndarray

    def __post_init__(self):
        for name in ("pitch_gimbal", "yaw_gimbal"):
            m = np.array(getattr(self, name), dtype=float)
            if m.shape != (3, 3):
                raise ValueError(f"{name} must be 3x3, got {m.shape}")
            if not np.all(np.isfinite(m)):
                raise ValueError(f"{name} has non-finite entries")
            if not np.allclose(m, m.T, rtol=0.0, atol=1e-15):
                raise ValueError(f"{name} must be symmetric")
            if np.any(np.diag(m) <= 0.0):
                raise ValueError(f"{name} needs positive moments of inertia")
            m.flags.writeable = False
            object.__setattr__(self, name, m)
        if self.j_k <= 0.0:
            raise ValueError("combined yaw-axis inertia must be positive")

    def __eq__(self, other):
        if not isinstance(other, InertiaModel):
            return NotImplemented
        return np.array_equal(self.pitch_gimbal, other.pitch_gimbal) and np.array_equal(
            self.yaw_gimbal, other.yaw_gimbal
        )

    @property
    def j_ay(self) -> float:
        """Pitch-gimbal moment of inertia about its y-axis [kg m^2]."""
        return float(self.pitch_gimbal[1, 1])

    @property
    def j_k(self) -> float:
        """Yaw-channel inertia: outer z moment plus inner z moment [kg m^2]."""
        return float(self.yaw_gimbal[2, 2] + self.pitch_gimbal[2, 2])

    @cached_property
    def symmetry(self) -> "SymmetryReport":
        """Cached symmetric-design report (tolerance 1e-12 kg m^2)."""
        return validate_symmetry(self)


@dataclass(frozen=True)
class NoiseSpec:
    """Additive torque-channel noise model.

    Zero-mean Gaussian torque with standard deviation ``sigma_y`` /
    ``sigma_z`` [N m] on the pitch / yaw channel, sampled once per
    integrator macro-step from a generator seeded with ``seed``. Stands
    in for residual products-of-inertia design error and other
    mechanical noise. Defaults are implementation choices, not values
    from any reference design.
    """

    enabled: bool = False
    sigma_y: float = 0.002
    sigma_z: float = 0.002
    seed: int = 1234

    def __post_init__(self):
        if self.sigma_y < 0.0 or self.sigma_z < 0.0:
            raise ValueError("noise standard deviations must be >= 0")


@dataclass(frozen=True)
class SymmetryReport:
    """Outcome of the symmetric-design check."""

    passed: bool
    violations: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.passed


def default_model() -> InertiaModel:
    """Inertia model used by the bundled presets (satisfies symmetry)."""
    return InertiaModel(
        pitch_gimbal=np.diag([0.003, 0.008, 0.003]),
        yaw_gimbal=np.diag([0.003, 0.006, 0.0003]),
    )


def validate_symmetry(model: InertiaModel, tol: float = 1e-12) -> SymmetryReport:
    """Check the symmetric-design conditions within absolute tolerance.

    Conditions: all products of inertia vanish on both gimbals, the
    pitch gimbal has equal x and z moments, and the outer y moment
    equals the sum of the inner and outer x moments.
    """
    a, k = model.pitch_gimbal, model.yaw_gimbal
    violations = []
    for (i, j), label in (((0, 1), "xy"), ((0, 2), "xz"), ((1, 2), "yz")):
        if abs(a[i, j]) > tol:
            violations.append(f"pitch product of inertia {label} = {a[i, j]:g} != 0")
        if abs(k[i, j]) > tol:
            violations.append(f"yaw product of inertia {label} = {k[i, j]:g} != 0")
    if abs(a[0, 0] - a[2, 2]) > tol:
        violations.append(
            f"pitch x and z moments differ: {a[0, 0]:g} != {a[2, 2]:g}"
        )
    if abs(k[0, 0] + a[0, 0] - k[1, 1]) > tol:
        violations.append(
            "yaw y moment must equal yaw x + pitch x moments: "
            f"{k[1, 1]:g} != {k[0, 0]:g} + {a[0, 0]:g}"
        )
    return SymmetryReport(not violations, tuple(violations))


def pitch_accel_drift(t: float, state: GimbalState, body: BodyRates) -> float:
    """Platform-induced angular acceleration on the pitch rate channel.

    Time derivative of the body-rate contribution to the LOS elevation
    rate, i.e. of ``p sin(x3) - q cos(x3)`` along trajectories with
    ``x3_dot = x4``. Appears additively in the ``x2`` dynamics
    [rad/s^2].
    """
    s3, c3 = math.sin(state.x3), math.cos(state.x3)
    x4 = state.x4
    return (
        body.p_dot * s3 + x4 * body.p * c3 - body.q_dot * c3 + x4 * body.q * s3
    )


def yaw_accel_drift(
    t: float, state: GimbalState, body: BodyRates, model: InertiaModel
) -> float:
    """Platform- and coupling-induced acceleration on the yaw rate channel.

    Combines the body yaw acceleration with the inertia cross-coupling
    between the yaw-frame x rate and the LOS elevation rate [rad/s^2].
    """
    s3, c3 = math.sin(state.x3), math.cos(state.x3)
    ratio = model.j_ay / model.j_k
    return -body.r_dot - ratio * (body.p * c3 + body.q * s3) * (
        -body.p * s3 + body.q * c3 + state.x2
    )


def _rhs(
    x1: float,
    x2: float,
    x3: float,
    x4: float,
    u1: float,
    u2: float,
    p: float,
    q: float,
    r: float,
    p_dot: float,
    q_dot: float,
    r_dot: float,
    j_ay: float,
    j_k: float,
    j_ratio: float,
) -> tuple[float, float, float, float, float, float]:
    # Hot path used by the integrator; must produce bit-identical results
    # to state_derivative (asserted in tests). u1/u2 already include any
    # held noise torque.
    s3, c3 = math.sin(x3), math.cos(x3)
    s1, c1 = math.sin(x1), math.cos(x1)
    dx2 = u1 / j_ay + (p_dot * s3 + x4 * p * c3 - q_dot * c3 + x4 * q * s3)
    dx4 = u2 / j_k + (-r_dot - j_ratio * (p * c3 + q * s3) * (-p * s3 + q * c3 + x2))
    q_a = -p * s3 + q * c3 + x2
    r_a = p * c3 * s1 + q * s3 * s1 + r * c1 + x4 * c1
    return (x2, dx2, x4, dx4, q_a, r_a)


def state_derivative(
    t: float,
    state: GimbalState,
    u: TorqueCommand,
    body: BodyRates,
    model: InertiaModel,
    noise_torque: tuple[float, float] = (0.0, 0.0),
    require_symmetric: bool = True,
) -> GimbalState:
    """Time derivative of the augmented gimbal state.

    ``noise_torque`` is the realized additive torque draw for this
    macro-step (held constant across integrator stages); pass the
    default for noise-free evaluation. With ``require_symmetric`` the
    model must pass ``validate_symmetry``; set it False to waive
    explicitly. Raises ValueError on non-finite inputs or an asymmetric
    model.
    """
    values = (*state, *u, *body, *noise_torque)
    if not all(math.isfinite(v) for v in values):
        raise ValueError("state_derivative requires finite state/input values")
    if require_symmetric and not model.symmetry:
        raise ValueError(
            "inertia model violates the symmetric-design assumptions: "
            + "; ".join(model.symmetry.violations)
        )
    d = _rhs(
        state.x1,
        state.x2,
        state.x3,
        state.x4,
        u.u1 + noise_torque[0],
        u.u2 + noise_torque[1],
        body.p,
        body.q,
        body.r,
        body.p_dot,
        body.q_dot,
        body.r_dot,
        model.j_ay,
        model.j_k,
        model.j_ay / model.j_k,
    )
    return GimbalState(*d)
