"""Smooth reference trajectories with analytic derivatives through snap.

Position generators produce FlatReference samples (position and its first
four time derivatives); the attitude generator produces kinematically
consistent (q_d, w_d, w_d_dot) tuples.  All derivatives are closed-form,
never numeric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .attctl import AttitudeReference
from .errors import TrajectoryDomainError
from .so3 import AxisAngle, UnitQuaternion, from_axis_angle, quat_mul

Array = np.ndarray


@dataclass(frozen=True)
class FlatReference:
    """Desired position and time derivatives up to snap (m, m/s, ... m/s^4).

    Fields are float64 3-vectors; generators guarantee finiteness on their
    domain.
    """

    r_d: Array
    r_d_dot: Array
    r_d_ddot: Array
    r_d_jerk: Array
    r_d_snap: Array


def _vec(x) -> Array:
    return np.asarray(x, dtype=np.float64).reshape(3)


@dataclass(frozen=True)
class Setpoint:
    """Constant position hold."""

    position: Array
    duration: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "position", _vec(self.position))

    def flat(self, t: float) -> FlatReference:
        z = np.zeros(3)
        return FlatReference(self.position, z, z, z, z)


@dataclass(frozen=True)
class Circle:
    """Horizontal circle of given radius at angular rate omega, at a fixed
    height above `center`."""

    radius: float
    omega: float
    center: Array = field(default_factory=lambda: np.zeros(3))
    phase: float = 0.0
    duration: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))

    def flat(self, t: float) -> FlatReference:
        a, w = self.radius, self.omega
        th = w * t + self.phase
        c, s = math.cos(th), math.sin(th)
        aw = a * w
        return FlatReference(
            self.center + np.array([a * c, a * s, 0.0]),
            np.array([-aw * s, aw * c, 0.0]),
            np.array([-aw * w * c, -aw * w * s, 0.0]),
            np.array([aw * w**2 * s, -aw * w**2 * c, 0.0]),
            np.array([aw * w**3 * c, aw * w**3 * s, 0.0]),
        )


@dataclass(frozen=True)
class Lissajous:
    """Per-axis sinusoids r_i(t) = center_i + amp_i * sin(omega_i t + phase_i)."""

    amplitude: Array
    omega: Array
    phase: Array = field(default_factory=lambda: np.zeros(3))
    center: Array = field(default_factory=lambda: np.zeros(3))
    duration: float | None = None

    def __post_init__(self):
        for name in ("amplitude", "omega", "phase", "center"):
            object.__setattr__(self, name, _vec(getattr(self, name)))

    def flat(self, t: float) -> FlatReference:
        A, w = self.amplitude, self.omega
        th = w * t + self.phase
        s, c = np.sin(th), np.cos(th)
        return FlatReference(
            self.center + A * s,
            A * w * c,
            -A * w**2 * s,
            -A * w**3 * c,
            A * w**4 * s,
        )


@dataclass(frozen=True)
class PolynomialSegment:
    """Seventh-order polynomial per axis pinned to endpoint position,
    velocity, acceleration, and jerk; C^4 on [0, duration]."""

    start: Array
    end: Array
    duration: float
    start_derivatives: tuple = ((0.0,) * 3, (0.0,) * 3, (0.0,) * 3)  # vel, acc, jerk
    end_derivatives: tuple = ((0.0,) * 3, (0.0,) * 3, (0.0,) * 3)

    def __post_init__(self):
        if not self.duration > 0.0:
            raise ValueError("duration must be positive")
        T = self.duration
        rows = []
        rhs = []
        for t_end, pos, derivs in (
            (0.0, _vec(self.start), self.start_derivatives),
            (T, _vec(self.end), self.end_derivatives),
        ):
            bcs = [pos] + [_vec(d) for d in derivs]
            for order, value in enumerate(bcs):
                row = np.zeros(8)
                for k in range(order, 8):
                    coef = math.perm(k, order)
                    row[k] = coef * t_end ** (k - order)
                rows.append(row)
                rhs.append(value)
        coeffs = np.linalg.solve(np.array(rows), np.array(rhs))  # (8, 3)
        coeffs.setflags(write=False)
        object.__setattr__(self, "_coeffs", coeffs)

    def flat(self, t: float) -> FlatReference:
        c = self._coeffs
        out = []
        for order in range(5):
            powers = np.zeros(8)
            for k in range(order, 8):
                powers[k] = math.perm(k, order) * t ** (k - order)
            out.append(powers @ c)
        return FlatReference(*out)


@dataclass(frozen=True)
class AttitudeSpin:
    """Rotation about a fixed body axis: angle(t) = angle0 + rate * t
    + wobble_amp * sin(wobble_freq * t), starting from `base`."""

    axis: Array
    rate: float = 0.0
    angle0: float = 0.0
    wobble_amp: float = 0.0
    wobble_freq: float = 0.0
    base: UnitQuaternion = field(default_factory=UnitQuaternion.identity)
    duration: float | None = None

    def __post_init__(self):
        ax = _vec(self.axis)
        n = float(np.linalg.norm(ax))
        if n < 1e-12:
            raise ValueError("spin axis must be nonzero")
        ax = ax / n
        ax.setflags(write=False)
        object.__setattr__(self, "axis", ax)

    def attitude(self, t: float) -> AttitudeReference:
        th = self.angle0 + self.rate * t + self.wobble_amp * math.sin(self.wobble_freq * t)
        th_dot = self.rate + self.wobble_amp * self.wobble_freq * math.cos(self.wobble_freq * t)
        th_ddot = -self.wobble_amp * self.wobble_freq**2 * math.sin(self.wobble_freq * t)
        q_d = quat_mul(self.base, from_axis_angle(AxisAngle(self.axis, th)))
        return AttitudeReference(q_d, th_dot * self.axis, th_ddot * self.axis)


PositionSpec = Setpoint | Circle | Lissajous | PolynomialSegment
TrajectorySpec = PositionSpec | AttitudeSpin


def _check_domain(spec, t: float):
    if t < 0.0 or (spec.duration is not None and t > spec.duration):
        raise TrajectoryDomainError(
            f"t={t} outside trajectory domain [0, {spec.duration}]"
        )


def sample_flat(spec: TrajectorySpec, t: float) -> FlatReference:
    """Sample a position trajectory and its derivatives at time t."""
    if not hasattr(spec, "flat"):
        raise TypeError(f"{type(spec).__name__} is not a position trajectory")
    _check_domain(spec, t)
    return spec.flat(t)


def sample_attitude(spec: TrajectorySpec, t: float) -> AttitudeReference:
    """Sample an attitude trajectory (q_d, w_d, w_d_dot) at time t."""
    if not hasattr(spec, "attitude"):
        raise TypeError(f"{type(spec).__name__} is not an attitude trajectory")
    _check_domain(spec, t)
    return spec.attitude(t)


def is_attitude_spec(spec: TrajectorySpec) -> bool:
    return hasattr(spec, "attitude")
