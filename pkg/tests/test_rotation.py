import numpy as np
import pytest

from gyrocal import Quaternion, random_orientation, random_pose, rotate_vector
from gyrocal.rotation import random_unit_vector


class TestRotateVector:
    def test_half_turn_about_x(self):
        q = Quaternion.from_axis_angle((1, 0, 0), np.pi)
        np.testing.assert_allclose(rotate_vector(q, (0, 0, 1)), [0, 0, -1], atol=1e-12)

    def test_identity(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            v = rng.normal(size=3)
            np.testing.assert_array_equal(rotate_vector(Quaternion.identity(), v), v)

    def test_quarter_turn_about_z(self):
        q = Quaternion.from_axis_angle((0, 0, 1), np.pi / 2)
        np.testing.assert_allclose(rotate_vector(q, (1, 0, 0)), [0, 1, 0], atol=1e-12)

    def test_norm_preserved(self):
        rng = np.random.default_rng(1)
        for _ in range(300):
            q = random_orientation(rng)
            v = rng.normal(size=3) * rng.uniform(0.1, 100)
            rotated = rotate_vector(q, v)
            assert np.linalg.norm(rotated) == pytest.approx(np.linalg.norm(v), rel=1e-12)

    def test_non_unit_rejected(self):
        q = Quaternion(1.0, 0.5, 0.0, 0.0)
        with pytest.raises(ValueError, match="unit norm"):
            rotate_vector(q, (1, 0, 0))


class TestRandomPose:
    def test_deterministic_given_seed(self):
        q1 = random_pose(np.random.default_rng(99), (0, 0, 1))
        q2 = random_pose(np.random.default_rng(99), (0, 0, 1))
        assert q1 == q2

    def test_constraint_axis_exactly_preserved(self):
        rng = np.random.default_rng(2)
        axis = np.array([0.0, 0.0, 1.0])
        for _ in range(100):
            q = random_pose(rng, axis)
            np.testing.assert_array_equal(rotate_vector(q, axis), axis)

    def test_rotated_gravity_uniform(self):
        # composed with a random installation the poses cover orientations
        # uniformly: the rotated gravity z-component averages to zero
        rng = np.random.default_rng(3)
        total = 0.0
        n = 10_000
        for _ in range(n):
            install = random_orientation(rng)
            axis = random_unit_vector(rng)
            gravity = rotate_vector(install, (0.0, 0.0, 1.0))
            total += rotate_vector(random_pose(rng, axis), gravity)[2]
        assert abs(total / n) < 0.05


class TestQuaternion:
    def test_compose_matches_sequential_rotation(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            q1, q2 = random_orientation(rng), random_orientation(rng)
            v = rng.normal(size=3)
            np.testing.assert_allclose(
                rotate_vector(q1.compose(q2), v),
                rotate_vector(q1, rotate_vector(q2, v)),
                atol=1e-12,
            )

    def test_conjugate_inverts(self):
        rng = np.random.default_rng(5)
        q = random_orientation(rng)
        v = rng.normal(size=3)
        np.testing.assert_allclose(
            rotate_vector(q.conjugate(), rotate_vector(q, v)), v, atol=1e-12
        )

    def test_random_orientation_unit_norm(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            assert random_orientation(rng).norm == pytest.approx(1.0, abs=1e-12)

    def test_zero_axis_rejected(self):
        with pytest.raises(ValueError):
            Quaternion.from_axis_angle((0, 0, 0), 1.0)
