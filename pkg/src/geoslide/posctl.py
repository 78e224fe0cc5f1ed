"""Outer-loop position controller.

Builds the desired specific force

    u = r_ddot_d - alpha * r_e_dot + g - K * s_pos,      s_pos = r_e_dot + alpha * r_e,

extracts thrust T = m * ||u|| and the tilt-only desired attitude
R_d = align_e3(u), and differentiates the normalized force direction to
obtain the feedforward body rates consumed by the attitude loop:

    [w_dy, -w_dx, 0]^T    = R_d^T * uhat_dot
    [a_dy, -a_dx, 0]^T    = R_d^T * uhat_ddot - w_d x (R_d^T * uhat_dot)

with the z-components pinned to zero (align_e3 produces no rotation about
the thrust axis, so zero yaw rate is the matching choice).

Computing u_dot and u_ddot requires acceleration and jerk feedback.  Two
modes are provided: `oracle`, which evaluates the plant's own translational
model (including any active disturbance) and differentiates it analytically,
and `numeric_diff`, which backward-differences stored velocity-error samples
at the control rate.  The second is the field-realistic option and is
measurably worse; keeping both makes the gap quantifiable.

The optional robust drag term  + c_hat * ||v|| v - 0.25 * ||v||^4 * s_pos
counteracts quadratic drag with nominal coefficient c_hat.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import so3
from .attctl import AttitudeReference
from .dynamics import Disturbance, RigidBodyState, VehicleParams
from .errors import FreeFallSingularityError
from .traj import FlatReference

Array = np.ndarray

#: commanded specific-force norms below this are treated as free fall
FORCE_SINGULARITY_TOL = 1e-9


class FeedbackMode(enum.Enum):
    ORACLE = "oracle"
    NUMERIC_DIFF = "numeric_diff"


@dataclass(frozen=True)
class PositionGains:
    """Sliding pole alpha (1/s) and force gain matrix k (symmetric PD).

    rho is derived as the smallest eigenvalue of k.  Construction verifies
    that the ideal-attitude closed loop r_e_ddot + (alpha I + k) r_e_dot
    + alpha k r_e = 0 is Hurwitz, rejecting any gain set that is not.
    """

    alpha: float
    k: Array

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise ValueError("alpha must be positive")
        K = np.asarray(self.k, dtype=np.float64)
        if K.ndim == 1 and K.shape == (3,):
            K = np.diag(K)
        if K.shape != (3, 3) or np.max(np.abs(K - K.T)) > 1e-12:
            raise ValueError("k must be a symmetric 3x3 matrix (or a length-3 diagonal)")
        eigs = np.linalg.eigvalsh(K)
        if eigs[0] <= 0.0:
            raise ValueError("k must be positive definite")
        A = np.zeros((6, 6))
        A[0:3, 3:6] = np.eye(3)
        A[3:6, 0:3] = -self.alpha * K
        A[3:6, 3:6] = -(self.alpha * np.eye(3) + K)
        if np.max(np.linalg.eigvals(A).real) >= 0.0:
            raise ValueError("gains yield an unstable ideal-attitude error system")
        K = K.copy()
        K.setflags(write=False)
        object.__setattr__(self, "k", K)
        object.__setattr__(self, "rho", float(eigs[0]))

    rho: float = 0.0  # derived in __post_init__


@dataclass(frozen=True)
class PositionErrorState:
    """r_e, r_e_dot, and the position sliding variable s_pos = r_e_dot + alpha r_e."""

    r_e: Array
    r_e_dot: Array
    s_pos: Array


@dataclass(frozen=True)
class OuterLoopOutput:
    """Desired specific force u (m/s^2), thrust T (N), and the attitude
    reference (q_d, w_d, w_d_dot) handed to the inner loop."""

    u: Array
    thrust: float
    attitude_ref: AttitudeReference


def position_error(
    state: RigidBodyState, ref: FlatReference, gains: PositionGains
) -> PositionErrorState:
    r_e = state.position - ref.r_d
    r_e_dot = state.velocity - ref.r_d_dot
    return PositionErrorState(r_e, r_e_dot, r_e_dot + gains.alpha * r_e)


def desired_force(
    err: PositionErrorState, ref: FlatReference, gains: PositionGains, gravity: Array
) -> Array:
    """u = r_ddot_d - alpha r_e_dot + g - K s_pos."""
    return ref.r_d_ddot - gains.alpha * err.r_e_dot + gravity - gains.k @ err.s_pos


def desired_force_robust(
    err: PositionErrorState,
    ref: FlatReference,
    gains: PositionGains,
    state: RigidBodyState,
    c_d_hat: float,
    gravity: Array,
) -> Array:
    """Robust-drag force law: nominal u plus c_hat ||v|| v - 0.25 ||v||^4 s_pos."""
    v = state.velocity
    nv = float(np.linalg.norm(v))
    return (
        desired_force(err, ref, gains, gravity)
        + (c_d_hat * nv) * v
        - 0.25 * nv**4 * err.s_pos
    )


def extract_thrust_attitude(u, params: VehicleParams) -> tuple[float, Array]:
    """Thrust T = m ||u|| and tilt rotation R_d with R_d (T/m) e3 = u.

    Raises FreeFallSingularityError when ||u|| < 1e-9: the attitude is
    undefined when no force is commanded.
    """
    u = np.asarray(u, dtype=np.float64)
    n = math.sqrt(float(u @ u))
    if n < FORCE_SINGULARITY_TOL:
        raise FreeFallSingularityError(
            "commanded specific force vanished; desired attitude undefined"
        )
    return params.mass * n, so3.align_e3(u)


def feedforward_rates(u, u_dot, u_ddot, rot_d) -> tuple[Array, Array]:
    """Desired body rates (w_d, w_d_dot) from the force direction derivatives.

    uhat_dot  = (u_dot - nhat_dot uhat)/||u||       (projection of u_dot)
    uhat_ddot = (u_ddot - 2 n_dot uhat_dot - n_ddot uhat)/||u||

    The command zeroes the z-components.  The aligned frame itself carries a
    small true yaw rate, -(uhat x uhat_dot).e3 / (1 + uhat.e3); the second
    derivative chain must rotate with that full rate so that w_d_dot is the
    exact time derivative of the commanded w_d.
    """
    u = np.asarray(u, dtype=np.float64)
    n = math.sqrt(float(u @ u))
    if n < FORCE_SINGULARITY_TOL:
        raise FreeFallSingularityError(
            "commanded specific force vanished; feedforward rates undefined"
        )
    uhat = u / n
    n_dot = float(uhat @ u_dot)
    uhat_dot = (u_dot - n_dot * uhat) / n
    n_ddot = float(uhat_dot @ u_dot) + float(uhat @ u_ddot)
    uhat_ddot = (u_ddot - 2.0 * n_dot * uhat_dot - n_ddot * uhat) / n

    w = rot_d.T @ uhat_dot
    omega_d = np.array([-w[1], w[0], 0.0])
    denom = 1.0 + uhat[2]
    if abs(denom) > 1e-9:
        yaw_rate = -(uhat[0] * uhat_dot[1] - uhat[1] * uhat_dot[0]) / denom
    else:
        yaw_rate = 0.0  # anti-parallel: frame rate is ill-defined anyway
    frame_rate = np.array([omega_d[0], omega_d[1], yaw_rate])
    v = rot_d.T @ uhat_ddot - so3.cross3(frame_rate, w)
    omega_d_dot = np.array([-v[1], v[0], 0.0])
    return omega_d, omega_d_dot


class OuterLoop:
    """Stateful outer loop: gains, plant model for feedback terms, feedback
    mode, and (in numeric_diff mode) the finite-difference history buffer.

    Each simulation owns one instance; compute() is pure given the buffer
    contents, push_sample() advances the buffer once per control step.
    """

    def __init__(
        self,
        gains: PositionGains,
        params: VehicleParams,
        mode: FeedbackMode = FeedbackMode.ORACLE,
        disturbance: Disturbance | None = None,
        drag_gain: float | None = None,
    ):
        self.gains = gains
        self.params = params
        self.mode = mode
        self.disturbance = disturbance if disturbance is not None else Disturbance.none()
        self.drag_gain = drag_gain
        self._history: deque[Array] = deque(maxlen=3)
        self._dt: float | None = None

    def reset(self):
        self._history.clear()
        self._dt = None

    def push_sample(self, state: RigidBodyState, ref: FlatReference, dt: float):
        """Record one velocity-error sample (numeric_diff mode, control rate)."""
        self._dt = dt
        self._history.append(state.velocity - ref.r_d_dot)

    def _estimated_error_derivatives(self) -> tuple[Array, Array]:
        """Backward-difference estimates of r_e_ddot and r_e_jerk."""
        h = self._history
        if self._dt is None or len(h) < 2:
            return np.zeros(3), np.zeros(3)
        dt = self._dt
        acc = (h[-1] - h[-2]) / dt
        if len(h) < 3:
            return acc, np.zeros(3)
        jerk = (h[-1] - 2.0 * h[-2] + h[-3]) / (dt * dt)
        return acc, jerk

    def _robust_first_derivative(self, state, err, s_dot, accel) -> Array:
        """d/dt of (c ||v|| v - 0.25 ||v||^4 s_pos)."""
        v = state.velocity
        c = self.drag_gain
        nv = float(np.linalg.norm(v))
        nv_dot = float(v @ accel) / nv if nv >= 1e-12 else 0.0
        s = err.s_pos
        return c * (nv_dot * v + nv * accel) - 0.25 * (
            4.0 * nv**3 * nv_dot * s + nv**4 * s_dot
        )

    def _robust_second_derivative(self, state, err, s_dot, s_ddot, accel, jerk) -> Array:
        """d^2/dt^2 of (c ||v|| v - 0.25 ||v||^4 s_pos)."""
        v = state.velocity
        c = self.drag_gain
        nv = float(np.linalg.norm(v))
        if nv < 1e-12:
            nv_dot = 0.0
            nv_ddot = 0.0
        else:
            nv_dot = float(v @ accel) / nv
            nv_ddot = (float(accel @ accel) + float(v @ jerk)) / nv - nv_dot**2 / nv
        s = err.s_pos
        return c * (nv_ddot * v + 2.0 * nv_dot * accel + nv * jerk) - 0.25 * (
            (12.0 * nv**2 * nv_dot**2 + 4.0 * nv**3 * nv_ddot) * s
            + 8.0 * nv**3 * nv_dot * s_dot
            + nv**4 * s_ddot
        )

    def compute(self, state: RigidBodyState, ref: FlatReference) -> OuterLoopOutput:
        """Full outer-loop evaluation for the current state and reference."""
        gains, params = self.gains, self.params
        g = params.gravity
        robust = self.drag_gain is not None
        err = position_error(state, ref, gains)
        if robust:
            u = desired_force_robust(err, ref, gains, state, self.drag_gain, g)
        else:
            u = desired_force(err, ref, gains, g)
        thrust, rot_d = extract_thrust_attitude(u, params)

        # acceleration feedback
        if self.mode is FeedbackMode.ORACLE:
            body_z = so3.body_axis_z(state.attitude)
            accel = (
                (thrust / params.mass) * body_z
                - g
                + self.disturbance.force(state.velocity) / params.mass
            )
            acc_e = accel - ref.r_d_ddot
        else:
            acc_e, jerk_e = self._estimated_error_derivatives()
            accel = acc_e + ref.r_d_ddot

        s_dot = acc_e + gains.alpha * err.r_e_dot
        u_dot = ref.r_d_jerk - gains.alpha * acc_e - gains.k @ s_dot
        if robust:
            u_dot = u_dot + self._robust_first_derivative(state, err, s_dot, accel)

        # jerk feedback; in oracle mode the thrust rate follows from u_dot
        if self.mode is FeedbackMode.ORACLE:
            uhat = u / math.sqrt(float(u @ u))
            thrust_dot = params.mass * float(uhat @ u_dot)
            w = state.angular_velocity
            body_z_rate = so3.rotate(state.attitude, np.array([w[1], -w[0], 0.0]))
            jerk = (
                (thrust_dot / params.mass) * body_z
                + (thrust / params.mass) * body_z_rate
                + self.disturbance.force_rate(state.velocity, accel) / params.mass
            )
            jerk_e = jerk - ref.r_d_jerk
        else:
            jerk = jerk_e + ref.r_d_jerk

        s_ddot = jerk_e + gains.alpha * acc_e
        u_ddot = ref.r_d_snap - gains.alpha * jerk_e - gains.k @ s_ddot
        if robust:
            u_ddot = u_ddot + self._robust_second_derivative(
                state, err, s_dot, s_ddot, accel, jerk
            )

        omega_d, omega_d_dot = feedforward_rates(u, u_dot, u_ddot, rot_d)
        q_d = so3.from_rotation(rot_d)
        return OuterLoopOutput(
            u=u,
            thrust=thrust,
            attitude_ref=AttitudeReference(q_d, omega_d, omega_d_dot),
        )


def outer_loop(
    state: RigidBodyState,
    ref: FlatReference,
    gains: PositionGains,
    params: VehicleParams,
    mode: FeedbackMode = FeedbackMode.ORACLE,
    disturbance: Disturbance | None = None,
    drag_gain: float | None = None,
) -> OuterLoopOutput:
    """Single-shot outer-loop evaluation (fresh history for numeric_diff)."""
    return OuterLoop(gains, params, mode, disturbance, drag_gain).compute(state, ref)
