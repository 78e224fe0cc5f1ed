"""Inner-loop attitude controller built on a quaternion sliding variable.

Error quaternion q_e = q_d* (x) q, error rate w_e = w - R_e^T w_d, and the
sliding variable

    s = w_e + 2 * lam * sgn(q_e0) * qv_e = w - w_r.

The torque law tau = w x (J w) + J * w_r_dot - K s makes J s_dot = -K s along
closed-loop solutions, so ||s|| decays exponentially; once s = 0 the error
vector part obeys d/dt ||qv_e||^2 = -2 lam ||qv_e||^2 sqrt(1 - ||qv_e||^2)
and decays at rate lam.  The sgn(q_e0) factor (with sgn(0) = +1) picks the
short way around the double cover, so q = -q_d commands zero torque.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import so3
from .dynamics import RigidBodyState, VehicleParams
from .so3 import UnitQuaternion, sgn

Array = np.ndarray


@dataclass(frozen=True)
class AttitudeReference:
    """Desired attitude q_d with desired body rate w_d and acceleration
    w_d_dot (both body frame, finite)."""

    q_d: UnitQuaternion
    omega_d: Array
    omega_d_dot: Array

    def __post_init__(self):
        for name in ("omega_d", "omega_d_dot"):
            v = np.asarray(getattr(self, name), dtype=np.float64)
            if v.shape != (3,):
                raise ValueError(f"{name} must be a 3-vector")
            object.__setattr__(self, name, v)

    @staticmethod
    def hold(q_d: UnitQuaternion) -> "AttitudeReference":
        return AttitudeReference(q_d, np.zeros(3), np.zeros(3))


@dataclass(frozen=True)
class AttitudeGains:
    """Sliding pole lam (1/s) and torque gain matrix k (symmetric PD).

    upsilon is derived as the smallest eigenvalue of k; it is the certified
    decay rate of ||s||.
    """

    lam: float
    k: Array

    def __post_init__(self):
        if not self.lam > 0.0:
            raise ValueError("lam must be positive")
        K = np.asarray(self.k, dtype=np.float64)
        if K.ndim == 1 and K.shape == (3,):
            K = np.diag(K)
        if K.shape != (3, 3) or np.max(np.abs(K - K.T)) > 1e-12:
            raise ValueError("k must be a symmetric 3x3 matrix (or a length-3 diagonal)")
        eigs = np.linalg.eigvalsh(K)
        if eigs[0] <= 0.0:
            raise ValueError("k must be positive definite")
        K = K.copy()
        K.setflags(write=False)
        object.__setattr__(self, "k", K)
        object.__setattr__(self, "upsilon", float(eigs[0]))

    upsilon: float = 0.0  # derived in __post_init__


@dataclass(frozen=True)
class AttitudeErrorState:
    """q_e, R(q_e), w_e, and the sliding variable s."""

    q_e: UnitQuaternion
    rot_e: Array
    omega_e: Array
    s: Array


def attitude_error(
    state: RigidBodyState, ref: AttitudeReference, gains: AttitudeGains
) -> AttitudeErrorState:
    """Attitude tracking error and sliding variable for the current state."""
    q_e = so3.error_quaternion(ref.q_d, state.attitude)
    rot_e = so3.to_rotation(q_e)
    omega_e = state.angular_velocity - rot_e.T @ ref.omega_d
    s = omega_e + (2.0 * gains.lam * sgn(q_e.scalar)) * q_e.vector
    return AttitudeErrorState(q_e=q_e, rot_e=rot_e, omega_e=omega_e, s=s)


def omega_r(ref: AttitudeReference, err: AttitudeErrorState, lam: float) -> Array:
    """Sliding reference rate w_r = R_e^T w_d - 2 lam sgn(q_e0) qv_e,
    so that s = w - w_r exactly."""
    return err.rot_e.T @ ref.omega_d - (2.0 * lam * sgn(err.q_e.scalar)) * err.q_e.vector


def error_vector_rate(err: AttitudeErrorState) -> Array:
    """d/dt of the error quaternion vector part:
    qv_e_dot = 0.5 (q_e0 w_e + qv_e x w_e)."""
    return 0.5 * (err.q_e.scalar * err.omega_e + so3.cross3(err.q_e.vector, err.omega_e))


def omega_r_dot(
    state: RigidBodyState,
    ref: AttitudeReference,
    err: AttitudeErrorState,
    lam: float,
) -> Array:
    """Time derivative of omega_r along the error kinematics.

    Uses R_e_dot = R_e [w_e]x, hence R_e_dot^T w_d = -w_e x (R_e^T w_d).
    """
    rd_wd = err.rot_e.T @ ref.omega_d
    return (
        -so3.cross3(err.omega_e, rd_wd)
        + err.rot_e.T @ ref.omega_d_dot
        - (2.0 * lam * sgn(err.q_e.scalar)) * error_vector_rate(err)
    )


def attitude_torque(
    state: RigidBodyState,
    ref: AttitudeReference,
    gains: AttitudeGains,
    params: VehicleParams,
) -> Array:
    """Torque command tau = w x (J w) + J w_r_dot - K s."""
    err = attitude_error(state, ref, gains)
    w = state.angular_velocity
    wr_dot = omega_r_dot(state, ref, err, gains.lam)
    return so3.cross3(w, params.inertia @ w) + params.inertia @ wr_dot - gains.k @ err.s
