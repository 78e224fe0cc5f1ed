"""Quaternion and rotation-matrix algebra.

Conventions: quaternions are scalar-first, q = (q0, qv) with q0 the real part
and qv the 3-vector imaginary part.  Rotation matrices map body-frame vectors
into the inertial frame, R(q) = I + 2*q0*[qv]x + 2*[qv]x^2.  Both q and -q
map to the same rotation (double cover); nothing in this module forces a
hemisphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDirectionError

Array = np.ndarray

E3 = np.array([0.0, 0.0, 1.0])

#: unit-norm tolerance for stored quaternions / rotation matrices
UNIT_TOL = 1e-9


def _as_vec3(v) -> Array:
    a = np.asarray(v, dtype=np.float64)
    if a.shape != (3,):
        raise ValueError(f"expected 3-vector, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class UnitQuaternion:
    """Unit quaternion (scalar, vector).  Renormalized on construction."""

    scalar: float
    vector: Array

    def __post_init__(self):
        vec = _as_vec3(self.vector)
        n = math.sqrt(self.scalar * self.scalar + float(vec @ vec))
        if n < 1e-12:
            raise ValueError("cannot normalize a near-zero quaternion")
        object.__setattr__(self, "scalar", float(self.scalar) / n)
        v = vec / n
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    @classmethod
    def _unchecked(cls, scalar: float, vector: Array) -> "UnitQuaternion":
        # internal fast path: vector is a fresh float64 (3,) array owned by
        # the caller; still renormalizes, skips conversion and checks
        x, y, z = vector
        n = math.sqrt(scalar * scalar + x * x + y * y + z * z)
        q = object.__new__(cls)
        object.__setattr__(q, "scalar", scalar / n)
        object.__setattr__(q, "vector", vector / n)
        return q

    @staticmethod
    def identity() -> "UnitQuaternion":
        return UnitQuaternion(1.0, np.zeros(3))

    @staticmethod
    def from_array(q) -> "UnitQuaternion":
        """Build from a length-4 array [q0, qx, qy, qz]."""
        q = np.asarray(q, dtype=np.float64)
        return UnitQuaternion(float(q[0]), q[1:4])

    def as_array(self) -> Array:
        """Components as a length-4 array [q0, qx, qy, qz]."""
        return np.concatenate(([self.scalar], self.vector))

    def __neg__(self) -> "UnitQuaternion":
        return UnitQuaternion(-self.scalar, -self.vector)


@dataclass(frozen=True)
class AxisAngle:
    """Rotation by `angle` radians about unit `axis`.

    The zero rotation may carry a zero axis; any other angle requires a
    unit axis.
    """

    axis: Array
    angle: float

    def __post_init__(self):
        ax = _as_vec3(self.axis)
        n = float(np.linalg.norm(ax))
        if self.angle == 0.0 and n == 0.0:
            pass  # parallel case: zero axis is allowed
        elif abs(n - 1.0) > 1e-12:
            raise ValueError(f"axis norm {n} not unit (and angle != 0)")
        ax = ax.copy()
        ax.setflags(write=False)
        object.__setattr__(self, "axis", ax)
        object.__setattr__(self, "angle", float(self.angle))


def sgn(x: float) -> float:
    """Sign of x with the convention sgn(0) = +1."""
    return 1.0 if x >= 0.0 else -1.0


def cross3(a, b) -> Array:
    """Cross product of two 3-vectors (fast path; no broadcasting)."""
    a0, a1, a2 = a
    b0, b1, b2 = b
    return np.array([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])


def cross_matrix(v) -> Array:
    """Skew-symmetric matrix [v]x such that [v]x @ w = v x w."""
    x, y, z = np.asarray(v, dtype=np.float64)
    return np.array([
        [0.0, -z, y],
        [z, 0.0, -x],
        [-y, x, 0.0],
    ])


def quat_mul(a: UnitQuaternion, b: UnitQuaternion) -> UnitQuaternion:
    """Hamilton product a (x) b, renormalized."""
    a0, av = a.scalar, a.vector
    b0, bv = b.scalar, b.vector
    scalar = a0 * b0 - float(av @ bv)
    vector = a0 * bv + b0 * av + cross3(av, bv)
    return UnitQuaternion._unchecked(scalar, vector)


def conjugate(q: UnitQuaternion) -> UnitQuaternion:
    """Quaternion conjugate q* = (q0, -qv); the inverse for unit q."""
    return UnitQuaternion._unchecked(q.scalar, -q.vector)


def to_rotation(q: UnitQuaternion) -> Array:
    """Rotation matrix R = I + 2*q0*[qv]x + 2*[qv]x^2."""
    q0 = q.scalar
    x, y, z = q.vector
    xx, yy, zz = x * x, y * y, z * z
    xy, xz, yz = x * y, x * z, y * z
    wx, wy, wz = q0 * x, q0 * y, q0 * z
    return np.array([
        [1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz), 2.0 * (xz + wy)],
        [2.0 * (xy + wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx)],
        [2.0 * (xz - wy), 2.0 * (yz + wx), 1.0 - 2.0 * (xx + yy)],
    ])


def from_rotation(R) -> UnitQuaternion:
    """Quaternion for a rotation matrix (Shepperd's method).

    Extracts the largest component first, so it is stable for all angles
    including rotations near 180 degrees.  The sign of the result is
    arbitrary (double cover).
    """
    R = np.asarray(R, dtype=np.float64)
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    d = np.array([
        1.0 + tr,
        1.0 + 2.0 * R[0, 0] - tr,
        1.0 + 2.0 * R[1, 1] - tr,
        1.0 + 2.0 * R[2, 2] - tr,
    ])
    i = int(np.argmax(d))
    if i == 0:
        w = 0.5 * math.sqrt(d[0])
        s = 0.25 / w
        x = (R[2, 1] - R[1, 2]) * s
        y = (R[0, 2] - R[2, 0]) * s
        z = (R[1, 0] - R[0, 1]) * s
    elif i == 1:
        x = 0.5 * math.sqrt(d[1])
        s = 0.25 / x
        w = (R[2, 1] - R[1, 2]) * s
        y = (R[0, 1] + R[1, 0]) * s
        z = (R[0, 2] + R[2, 0]) * s
    elif i == 2:
        y = 0.5 * math.sqrt(d[2])
        s = 0.25 / y
        w = (R[0, 2] - R[2, 0]) * s
        x = (R[0, 1] + R[1, 0]) * s
        z = (R[1, 2] + R[2, 1]) * s
    else:
        z = 0.5 * math.sqrt(d[3])
        s = 0.25 / z
        w = (R[1, 0] - R[0, 1]) * s
        x = (R[0, 2] + R[2, 0]) * s
        y = (R[1, 2] + R[2, 1]) * s
    return UnitQuaternion._unchecked(w, np.array([x, y, z]))


def from_axis_angle(aa: AxisAngle) -> UnitQuaternion:
    """Unit quaternion (cos(theta/2), axis * sin(theta/2))."""
    half = 0.5 * aa.angle
    return UnitQuaternion(math.cos(half), math.sin(half) * aa.axis)


def axis_angle_rotation(aa: AxisAngle) -> Array:
    """Rodrigues' formula R = I + sin(t)*[n]x + (1-cos(t))*[n]x^2."""
    K = cross_matrix(aa.axis)
    return np.eye(3) + math.sin(aa.angle) * K + (1.0 - math.cos(aa.angle)) * (K @ K)


def error_quaternion(q_d: UnitQuaternion, q: UnitQuaternion) -> UnitQuaternion:
    """Attitude error q_e = q_d* (x) q, so R(q_e) = R(q_d)^T R(q)."""
    return quat_mul(conjugate(q_d), q)


def frobenius_distance(R) -> float:
    """Frobenius norm ||R - I||_F; equals 2*sqrt(2)*||qv|| for R = R(q)."""
    return float(np.linalg.norm(np.asarray(R, dtype=np.float64) - np.eye(3)))


# below this cross-product norm the aligning axis is taken from the
# deterministic anti-parallel tie-break instead of a normalized near-zero
# cross product
_ALIGN_CROSS_TOL = 1e-8


def align_e3(u) -> Array:
    """Minimal rotation R with R @ e3 = u/||u||.

    The rotation axis is e3 x u (perpendicular to e3), so the result carries
    no rotation about the thrust axis.  Anti-parallel u uses the fixed
    tie-break axis (1,0,0) with angle pi; near-anti-parallel directions blend
    that axis with the exact angle to avoid normalizing a vanishing cross
    product.

    Raises DegenerateDirectionError on zero-norm input.
    """
    u = _as_vec3(u)
    n = float(np.linalg.norm(u))
    if n < 1e-12:
        raise DegenerateDirectionError("cannot align e3 with a zero vector")
    uh = u / n
    c = float(np.clip(uh[2], -1.0, 1.0))  # cos(angle) = e3 . u_hat
    cross = np.array([-uh[1], uh[0], 0.0])  # e3 x u_hat; ||cross|| = sin(angle)
    cn = float(np.linalg.norm(cross))
    if cn < _ALIGN_CROSS_TOL:
        if c > 0.0:
            return np.eye(3)
        return axis_angle_rotation(AxisAngle(np.array([1.0, 0.0, 0.0]), math.acos(c)))
    # Rodrigues with sin/cos taken directly from the geometry; exact for all
    # admissible inputs, no arccos conditioning loss near the poles.
    K = cross_matrix(cross)
    axis = cross / cn
    K2 = cross_matrix(axis)
    return np.eye(3) + K + (1.0 - c) * (K2 @ K2)


def rotate(q: UnitQuaternion, v) -> Array:
    """Apply the rotation of q to a 3-vector: R(q) @ v."""
    v = np.asarray(v, dtype=np.float64)
    qv = q.vector
    t = 2.0 * cross3(qv, v)
    return v + q.scalar * t + cross3(qv, t)


def body_axis_z(q: UnitQuaternion) -> Array:
    """Third column of R(q): the body z axis expressed in the inertial frame."""
    x, y, z = q.vector
    w = q.scalar
    return np.array([
        2.0 * (x * z + w * y),
        2.0 * (y * z - w * x),
        1.0 - 2.0 * (x * x + y * y),
    ])


def random_unit_quaternion(rng: np.random.Generator) -> UnitQuaternion:
    """Uniformly random rotation (Shoemake's subgroup method)."""
    u1, u2, u3 = rng.random(3)
    a, b = math.sqrt(1.0 - u1), math.sqrt(u1)
    return UnitQuaternion(
        a * math.sin(2.0 * math.pi * u2),
        np.array([
            a * math.cos(2.0 * math.pi * u2),
            b * math.sin(2.0 * math.pi * u3),
            b * math.cos(2.0 * math.pi * u3),
        ]),
    )


def is_rotation(R, tol: float = UNIT_TOL) -> bool:
    """True when R^T R = I elementwise within tol and det(R) = 1 within tol."""
    R = np.asarray(R, dtype=np.float64)
    return (
        np.all(np.abs(R.T @ R - np.eye(3)) < tol)
        and abs(float(np.linalg.det(R)) - 1.0) < tol
    )
