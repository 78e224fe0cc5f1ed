import math

import numpy as np
import pytest
from hypothesis import given, settings

from geoslide import so3
from geoslide.errors import DegenerateDirectionError
from geoslide.so3 import (
    AxisAngle,
    UnitQuaternion,
    align_e3,
    axis_angle_rotation,
    conjugate,
    cross_matrix,
    error_quaternion,
    frobenius_distance,
    from_axis_angle,
    from_rotation,
    quat_mul,
    random_unit_quaternion,
    sgn,
    to_rotation,
)

from conftest import unit_quaternions, vectors3

C45 = math.cos(math.pi / 4)
S45 = math.sin(math.pi / 4)


class TestQuatMul:
    def test_identity_element(self, rng):
        for _ in range(20):
            q = random_unit_quaternion(rng)
            out = quat_mul(q, UnitQuaternion.identity())
            np.testing.assert_allclose(out.as_array(), q.as_array(), atol=1e-15)

    def test_conjugate_is_inverse(self, rng):
        for _ in range(50):
            q = random_unit_quaternion(rng)
            out = quat_mul(q, conjugate(q))
            np.testing.assert_allclose(out.as_array(), [1, 0, 0, 0], atol=1e-14)
            out = quat_mul(conjugate(q), q)
            np.testing.assert_allclose(out.as_array(), [1, 0, 0, 0], atol=1e-14)

    def test_two_quarter_turns_about_z(self):
        q = UnitQuaternion(C45, np.array([0.0, 0.0, S45]))
        out = quat_mul(q, q)
        np.testing.assert_allclose(out.as_array(), [0, 0, 0, 1], atol=1e-15)


class TestConjugate:
    def test_identity(self):
        q = conjugate(UnitQuaternion.identity())
        np.testing.assert_allclose(q.as_array(), [1, 0, 0, 0])

    def test_sign_flip(self):
        q = conjugate(UnitQuaternion(0.0, np.array([0.0, 0.0, 1.0])))
        np.testing.assert_allclose(q.as_array(), [0, 0, 0, -1])

    @given(q=unit_quaternions())
    def test_involution(self, q):
        out = conjugate(conjugate(q))
        np.testing.assert_allclose(out.as_array(), q.as_array(), atol=1e-15)


class TestToRotation:
    def test_identity(self):
        np.testing.assert_allclose(to_rotation(UnitQuaternion.identity()), np.eye(3))

    def test_quarter_turn_about_z(self):
        q = UnitQuaternion(C45, np.array([0.0, 0.0, S45]))
        expected = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        np.testing.assert_allclose(to_rotation(q), expected, atol=1e-15)

    def test_double_cover(self, rng):
        for _ in range(100):
            q = random_unit_quaternion(rng)
            np.testing.assert_allclose(to_rotation(q), to_rotation(-q), atol=1e-15)

    @settings(max_examples=200)
    @given(a=unit_quaternions(), b=unit_quaternions())
    def test_group_homomorphism(self, a, b):
        lhs = to_rotation(quat_mul(a, b))
        rhs = to_rotation(a) @ to_rotation(b)
        np.testing.assert_allclose(lhs, rhs, atol=1e-8)

    @given(q=unit_quaternions())
    def test_result_is_rotation(self, q):
        assert so3.is_rotation(to_rotation(q), tol=1e-9)


class TestFromAxisAngle:
    def test_zero_angle(self):
        q = from_axis_angle(AxisAngle(np.array([0.0, 1.0, 0.0]), 0.0))
        np.testing.assert_allclose(q.as_array(), [1, 0, 0, 0])

    def test_half_turn_about_z(self):
        q = from_axis_angle(AxisAngle(np.array([0.0, 0.0, 1.0]), math.pi))
        np.testing.assert_allclose(q.as_array(), [0, 0, 0, 1], atol=1e-15)

    def test_matches_rodrigues_formula(self, rng):
        for _ in range(50):
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            angle = rng.uniform(-math.pi, math.pi)
            aa = AxisAngle(axis, angle)
            np.testing.assert_allclose(
                to_rotation(from_axis_angle(aa)), axis_angle_rotation(aa), atol=1e-12
            )

    def test_nonunit_axis_rejected(self):
        with pytest.raises(ValueError):
            AxisAngle(np.array([0.0, 0.0, 2.0]), 1.0)


class TestCrossMatrix:
    def test_zero(self):
        np.testing.assert_allclose(cross_matrix(np.zeros(3)), np.zeros((3, 3)))

    def test_right_hand_rule(self):
        out = cross_matrix(np.array([1.0, 0.0, 0.0])) @ np.array([0.0, 1.0, 0.0])
        np.testing.assert_allclose(out, [0, 0, 1])

    @given(v=vectors3())
    def test_matches_cross_product(self, v):
        w = np.array([0.3, -1.2, 2.0])
        np.testing.assert_allclose(cross_matrix(v) @ w, np.cross(v, w), atol=1e-12)

    def test_squared_trace(self, rng):
        # tr([v]x^2) = -2 ||v||^2
        for _ in range(100):
            v = rng.normal(size=3) * 3.0
            K = cross_matrix(v)
            assert abs(np.trace(K @ K) + 2.0 * float(v @ v)) < 1e-10


class TestErrorQuaternion:
    def test_zero_error(self, rng):
        for _ in range(20):
            q = random_unit_quaternion(rng)
            q_e = error_quaternion(q, q)
            assert abs(abs(q_e.scalar) - 1.0) < 1e-12
            np.testing.assert_allclose(q_e.vector, np.zeros(3), atol=1e-12)

    def test_identity_reference(self, rng):
        q = random_unit_quaternion(rng)
        q_e = error_quaternion(UnitQuaternion.identity(), q)
        np.testing.assert_allclose(q_e.as_array(), q.as_array(), atol=1e-15)

    def test_matches_rotation_composition(self, rng):
        for _ in range(100):
            q_d = random_unit_quaternion(rng)
            q = random_unit_quaternion(rng)
            lhs = to_rotation(error_quaternion(q_d, q))
            rhs = to_rotation(q_d).T @ to_rotation(q)
            np.testing.assert_allclose(lhs, rhs, atol=1e-9)


class TestFrobeniusDistance:
    def test_identity(self):
        assert frobenius_distance(np.eye(3)) == 0.0

    def test_quarter_turn(self):
        R = axis_angle_rotation(AxisAngle(np.array([0.0, 0.0, 1.0]), math.pi / 2))
        assert abs(frobenius_distance(R) - 2.0) < 1e-12

    def test_vector_part_identity(self, rng):
        worst = 0.0
        for _ in range(1000):
            q = random_unit_quaternion(rng)
            d = frobenius_distance(to_rotation(q))
            worst = max(worst, abs(d - 2.0 * math.sqrt(2.0) * np.linalg.norm(q.vector)))
        assert worst < 1e-10

    def test_conjugated_form(self, rng):
        # || Rtil R Rtil^T - I ||_F is invariant under conjugation
        for _ in range(200):
            q = random_unit_quaternion(rng)
            rtil = to_rotation(random_unit_quaternion(rng))
            R = to_rotation(q)
            d = frobenius_distance(rtil @ R @ rtil.T)
            assert abs(d - 2.0 * math.sqrt(2.0) * np.linalg.norm(q.vector)) < 1e-10


class TestSgn:
    def test_zero_is_positive(self):
        assert sgn(0.0) == 1.0
        assert sgn(-0.0) == 1.0

    def test_negative(self):
        assert sgn(-0.3) == -1.0

    def test_positive(self):
        assert sgn(7.0) == 1.0


class TestAlignE3:
    def test_parallel(self):
        np.testing.assert_allclose(align_e3(np.array([0.0, 0.0, 5.0])), np.eye(3))

    def test_x_direction(self):
        # quarter turn about +y takes e3 to e1
        R = align_e3(np.array([1.0, 0.0, 0.0]))
        expected = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]])
        np.testing.assert_allclose(R, expected, atol=1e-15)
        np.testing.assert_allclose(R @ so3.E3, [1, 0, 0], atol=1e-15)

    def test_anti_parallel_tie_break(self):
        R = align_e3(np.array([0.0, 0.0, -1.0]))
        np.testing.assert_allclose(R, np.diag([1.0, -1.0, -1.0]), atol=1e-15)

    def test_axis_perpendicular_to_e3(self, rng):
        # minimal rotation: the axis never has a z-component
        for _ in range(50):
            u = rng.normal(size=3)
            if np.linalg.norm(u[:2]) < 1e-6:
                continue
            R = align_e3(u)
            q = from_rotation(R)
            assert abs(q.vector[2]) < 1e-12

    def test_alignment_property(self, rng):
        for _ in range(200):
            u = rng.normal(size=3) * rng.uniform(0.1, 10.0)
            if np.linalg.norm(u) < 1e-8:
                continue
            R = align_e3(u)
            assert so3.is_rotation(R)
            np.testing.assert_allclose(R @ so3.E3, u / np.linalg.norm(u), atol=1e-9)

    def test_near_anti_parallel(self, rng):
        # cross-product norms down to 1e-8 keep full alignment accuracy
        for eps in (1e-2, 1e-4, 1e-6, 1e-8):
            for _ in range(10):
                phi = rng.uniform(0.0, 2.0 * math.pi)
                u = np.array(
                    [eps * math.cos(phi), eps * math.sin(phi), -math.sqrt(1.0 - eps**2)]
                )
                R = align_e3(u)
                assert np.linalg.norm(R @ so3.E3 - u) < 1e-9

    def test_zero_input_raises(self):
        with pytest.raises(DegenerateDirectionError):
            align_e3(np.zeros(3))


class TestFromRotation:
    def test_round_trip(self, rng):
        for _ in range(200):
            q = random_unit_quaternion(rng)
            R = to_rotation(q)
            np.testing.assert_allclose(to_rotation(from_rotation(R)), R, atol=1e-12)

    def test_half_turn_stability(self):
        for axis in (np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.array([0, 0, 1.0])):
            R = axis_angle_rotation(AxisAngle(axis, math.pi))
            np.testing.assert_allclose(to_rotation(from_rotation(R)), R, atol=1e-12)


class TestInvariants:
    @given(q=unit_quaternions())
    def test_unit_norm(self, q):
        assert abs(np.linalg.norm(q.as_array()) - 1.0) < 1e-9

    def test_zero_quaternion_rejected(self):
        with pytest.raises(ValueError):
            UnitQuaternion(0.0, np.zeros(3))

    def test_matrix_vector_frobenius_bound(self, rng):
        # ||A x|| <= ||A||_F ||x||
        for _ in range(1000):
            A = rng.normal(size=(3, 3)) * rng.uniform(0.1, 5.0)
            x = rng.normal(size=3)
            assert np.linalg.norm(A @ x) <= np.linalg.norm(A) * np.linalg.norm(x) + 1e-12

    def test_rotate_matches_matrix(self, rng):
        for _ in range(100):
            q = random_unit_quaternion(rng)
            v = rng.normal(size=3)
            np.testing.assert_allclose(so3.rotate(q, v), to_rotation(q) @ v, atol=1e-12)

    def test_body_axis_z_matches_matrix_column(self, rng):
        for _ in range(100):
            q = random_unit_quaternion(rng)
            np.testing.assert_allclose(so3.body_axis_z(q), to_rotation(q)[:, 2], atol=1e-14)
