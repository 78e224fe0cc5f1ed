"""Rigid-body dynamics with disturbance hooks and a fixed-step RK4 integrator.

Translational model: m * r_ddot = R * T * e3 - m * g + f_dist, with g a
vector (default (0, 0, 9.81), so gravity accelerates toward -e3).
Rotational model: J * w_dot = -w x (J w) + tau + tau_dist, body frame.
Attitude kinematics: q_dot = 0.5 * q (x) (0, w).

The integrator flattens the state to a 13-vector [r, v, q, w], runs a
classical RK4 step, and renormalizes the quaternion afterwards.  Derivative
evaluations normalize the quaternion analytically so that off-manifold
drift inside a step never feeds the controller or the kinematics.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import so3
from .errors import IntegrationBlowupError
from .so3 import UnitQuaternion

Array = np.ndarray

STATE_DIM = 13  # [r(3), v(3), q(4), w(3)]


@dataclass(frozen=True)
class RigidBodyState:
    """Position (m), velocity (m/s), attitude, body angular velocity (rad/s)."""

    position: Array
    velocity: Array
    attitude: UnitQuaternion
    angular_velocity: Array

    def __post_init__(self):
        for name in ("position", "velocity", "angular_velocity"):
            v = np.asarray(getattr(self, name), dtype=np.float64)
            if v.shape != (3,):
                raise ValueError(f"{name} must be a 3-vector")
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} has non-finite entries")
            v = v.copy()
            v.setflags(write=False)
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class VehicleParams:
    """Mass (kg), inertia tensor (kg m^2), gravity vector (m/s^2), and an
    optional translational drag coefficient (kg/m) for plants that model it."""

    mass: float
    inertia: Array
    gravity: Array = field(default_factory=lambda: np.array([0.0, 0.0, 9.81]))
    drag_coeff: float | None = None

    def __post_init__(self):
        if not self.mass > 0.0:
            raise ValueError("mass must be positive")
        J = np.asarray(self.inertia, dtype=np.float64)
        if J.shape != (3, 3):
            raise ValueError("inertia must be 3x3")
        if np.max(np.abs(J - J.T)) > 1e-12:
            raise ValueError("inertia must be symmetric within 1e-12")
        eigs = np.linalg.eigvalsh(J)
        if np.min(eigs) <= 0.0:
            raise ValueError("inertia must be positive definite")
        if self.drag_coeff is not None and self.drag_coeff < 0.0:
            raise ValueError("drag_coeff must be nonnegative")
        g = np.asarray(self.gravity, dtype=np.float64).copy()
        if g.shape != (3,):
            raise ValueError("gravity must be a 3-vector")
        J = J.copy()
        J.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "inertia", J)
        object.__setattr__(self, "gravity", g)
        Jinv = np.linalg.inv(J)
        Jinv.setflags(write=False)
        object.__setattr__(self, "_inertia_inv", Jinv)

    @property
    def inertia_inv(self) -> Array:
        return self._inertia_inv


@dataclass(frozen=True)
class ControlInput:
    """Collective thrust T (N, along body e3) and body torque tau (N m)."""

    thrust: float
    torque: Array

    def __post_init__(self):
        # actuator realizability: thrust cannot pull
        object.__setattr__(self, "thrust", max(0.0, float(self.thrust)))
        tau = np.asarray(self.torque, dtype=np.float64).copy()
        if tau.shape != (3,):
            raise ValueError("torque must be a 3-vector")
        tau.setflags(write=False)
        object.__setattr__(self, "torque", tau)

    @staticmethod
    def zero() -> "ControlInput":
        return ControlInput(0.0, np.zeros(3))


class DisturbanceKind(enum.Enum):
    NONE = "none"
    CONSTANT_FORCE = "constant_force"
    TRANSLATIONAL_DRAG = "translational_drag"
    CONSTANT_TORQUE = "constant_torque"


@dataclass(frozen=True)
class Disturbance:
    """Exogenous disturbance acting on the plant.

    constant_force: fixed inertial force vector (N).
    translational_drag: force -c_d * ||v|| * v with c_d in kg/m.
    constant_torque: fixed body torque (N m).
    """

    kind: DisturbanceKind
    parameters: Array

    def __post_init__(self):
        p = np.asarray(self.parameters, dtype=np.float64).copy()
        if not np.all(np.isfinite(p)):
            raise ValueError("disturbance parameters must be finite")
        p.setflags(write=False)
        object.__setattr__(self, "parameters", p)

    @staticmethod
    def none() -> "Disturbance":
        return Disturbance(DisturbanceKind.NONE, np.zeros(0))

    @staticmethod
    def constant_force(force) -> "Disturbance":
        return Disturbance(DisturbanceKind.CONSTANT_FORCE, np.asarray(force, dtype=np.float64))

    @staticmethod
    def translational_drag(c_d: float) -> "Disturbance":
        if c_d < 0.0:
            raise ValueError("drag coefficient must be nonnegative")
        return Disturbance(DisturbanceKind.TRANSLATIONAL_DRAG, np.array([c_d]))

    @staticmethod
    def constant_torque(torque) -> "Disturbance":
        return Disturbance(DisturbanceKind.CONSTANT_TORQUE, np.asarray(torque, dtype=np.float64))

    def force(self, velocity: Array) -> Array:
        """Translational force contribution (N, inertial frame)."""
        if self.kind is DisturbanceKind.CONSTANT_FORCE:
            return self.parameters
        if self.kind is DisturbanceKind.TRANSLATIONAL_DRAG:
            return -self.parameters[0] * float(np.linalg.norm(velocity)) * velocity
        return _ZERO3

    def force_rate(self, velocity: Array, accel: Array) -> Array:
        """Time derivative of force() along a trajectory with r_ddot = accel."""
        if self.kind is DisturbanceKind.TRANSLATIONAL_DRAG:
            n = float(np.linalg.norm(velocity))
            if n < 1e-12:
                return _ZERO3
            n_dot = float(velocity @ accel) / n
            return -self.parameters[0] * (n_dot * velocity + n * accel)
        return _ZERO3

    def body_torque(self) -> Array:
        """Rotational torque contribution (N m, body frame)."""
        if self.kind is DisturbanceKind.CONSTANT_TORQUE:
            return self.parameters
        return _ZERO3


_ZERO3 = np.zeros(3)
_ZERO3.setflags(write=False)


def pack_state(state: RigidBodyState) -> Array:
    """Flatten to [r, v, q0..q3, w]."""
    y = np.empty(STATE_DIM)
    y[0:3] = state.position
    y[3:6] = state.velocity
    y[6] = state.attitude.scalar
    y[7:10] = state.attitude.vector
    y[10:13] = state.angular_velocity
    return y


def _state_unchecked(r: Array, v: Array, q: UnitQuaternion, w: Array) -> RigidBodyState:
    # internal fast path for integrator-produced values; skips validation
    s = object.__new__(RigidBodyState)
    object.__setattr__(s, "position", r)
    object.__setattr__(s, "velocity", v)
    object.__setattr__(s, "attitude", q)
    object.__setattr__(s, "angular_velocity", w)
    return s


def unpack_state(y: Array) -> RigidBodyState:
    """Rebuild a state from the flat layout (attitude renormalized)."""
    return _state_unchecked(
        y[0:3],
        y[3:6],
        UnitQuaternion._unchecked(float(y[6]), y[7:10].copy()),
        y[10:13],
    )


def translational_acceleration(
    state: RigidBodyState, thrust: float, params: VehicleParams, dist: Disturbance
) -> Array:
    """r_ddot = (T/m) R e3 - g + f_dist/m for the current attitude."""
    body_z = so3.body_axis_z(state.attitude)
    return (
        (thrust / params.mass) * body_z
        - params.gravity
        + dist.force(state.velocity) / params.mass
    )


def state_derivative(
    state: RigidBodyState,
    control: ControlInput,
    params: VehicleParams,
    dist: Disturbance,
) -> Array:
    """Flat state tangent [r_dot, r_ddot, q_dot, w_dot]."""
    return _state_derivative_raw(state, control.thrust, control.torque, params, dist)


def _state_derivative_raw(
    state: RigidBodyState,
    thrust: float,
    torque: Array,
    params: VehicleParams,
    dist: Disturbance,
) -> Array:
    w = state.angular_velocity
    q = state.attitude
    accel = translational_acceleration(state, thrust, params, dist)
    Jw = params.inertia @ w
    w_dot = params.inertia_inv @ (torque + dist.body_torque() - so3.cross3(w, Jw))
    # q_dot = 0.5 q (x) (0, w)
    q0, qv = q.scalar, q.vector
    out = np.empty(STATE_DIM)
    out[0:3] = state.velocity
    out[3:6] = accel
    out[6] = -0.5 * float(qv @ w)
    out[7:10] = 0.5 * (q0 * w + so3.cross3(qv, w))
    out[10:13] = w_dot
    return out


def rk4_step(f: Callable[[float, Array], Array], t: float, y: Array, dt: float) -> Array:
    """One classical Runge-Kutta 4 step for y' = f(t, y)."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _flat_derivative(y: Array, control, params, dist) -> Array:
    return state_derivative(unpack_state(y), control, params, dist)


def integrate_step(
    state: RigidBodyState,
    control: ControlInput,
    params: VehicleParams,
    dist: Disturbance,
    dt: float,
    t: float = 0.0,
) -> RigidBodyState:
    """Advance one RK4 step with the control held constant.

    Raises IntegrationBlowupError (carrying t + dt) on non-finite results.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    y = pack_state(state)
    # overflow is handled by the explicit finite check below
    with np.errstate(over="ignore", invalid="ignore"):
        y_next = rk4_step(
            lambda _t, yy: _flat_derivative(yy, control, params, dist), t, y, dt
        )
    if not np.all(np.isfinite(y_next)):
        raise IntegrationBlowupError(t + dt)
    return unpack_state(y_next)


def angular_momentum(state: RigidBodyState, params: VehicleParams) -> Array:
    """Inertial-frame angular momentum R J w (conserved when torque-free)."""
    return so3.rotate(state.attitude, params.inertia @ state.angular_velocity)
