"""Unit quaternions for pose generation.

Scalar-first convention ``q = [w, x, y, z]``; a rotation by angle theta
about unit axis n is ``[cos(theta/2), sin(theta/2)*n]``. Rotations are
applied with the sandwich product, evaluated in the 2-cross-product form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sensors import as_vec3

_UNIT_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Quaternion:
    w: float
    x: float
    y: float
    z: float

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def normalized(self) -> "Quaternion":
        n = self.norm
        if n < 1e-12:
            raise ValueError("cannot normalize a near-zero quaternion")
        return Quaternion(self.w / n, self.x / n, self.y / n, self.z / n)

    def conjugate(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def compose(self, other: "Quaternion") -> "Quaternion":
        """Hamilton product self * other (apply ``other`` first)."""
        w1, x1, y1, z1 = self.w, self.x, self.y, self.z
        w2, x2, y2, z2 = other.w, other.x, other.y, other.z
        return Quaternion(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    @classmethod
    def identity(cls) -> "Quaternion":
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_axis_angle(cls, axis, angle: float) -> "Quaternion":
        """Rotation by ``angle`` radians about ``axis`` (normalized internally)."""
        axis = as_vec3(axis, "axis")
        n = np.linalg.norm(axis)
        if n < 1e-12:
            raise ValueError("rotation axis has near-zero magnitude")
        u = axis / n
        half = 0.5 * angle
        s = np.sin(half)
        return cls(float(np.cos(half)), float(s * u[0]), float(s * u[1]), float(s * u[2]))


def rotate_vector(q: Quaternion, v) -> np.ndarray:
    """Rotate a 3-vector by a unit quaternion.

    Preserves the vector norm to within 1e-12. Raises if ``q`` deviates
    from unit norm by more than 1e-6.
    """
    if abs(q.norm - 1.0) > _UNIT_TOLERANCE:
        raise ValueError(f"quaternion is not unit norm (|q| = {q.norm:.9f})")
    v = as_vec3(v, "v")
    u = q.vector
    t = 2.0 * np.cross(u, v)
    return v + q.w * t + np.cross(u, t)


def random_orientation(rng: np.random.Generator) -> Quaternion:
    """Uniformly random rotation (Shoemake's subgroup method)."""
    u1, u2, u3 = rng.random(3)
    a = np.sqrt(1.0 - u1)
    b = np.sqrt(u1)
    return Quaternion(
        float(a * np.sin(2.0 * np.pi * u2)),
        float(a * np.cos(2.0 * np.pi * u2)),
        float(b * np.sin(2.0 * np.pi * u3)),
        float(b * np.cos(2.0 * np.pi * u3)),
    )


def random_pose(rng: np.random.Generator, axis) -> Quaternion:
    """Uniformly random orientation that keeps ``axis`` fixed in the body frame.

    The admissible orientations form the one-parameter family of rotations
    about ``axis``; the angle is drawn uniformly from [0, 2*pi). Applying
    the result to ``axis`` returns ``axis`` exactly (the cross products
    of parallel vectors cancel term by term in floating point).
    """
    return Quaternion.from_axis_angle(axis, float(rng.uniform(0.0, 2.0 * np.pi)))


def random_unit_vector(rng: np.random.Generator) -> np.ndarray:
    """Uniformly random direction on the unit sphere."""
    while True:
        v = rng.normal(size=3)
        n = np.linalg.norm(v)
        if n > 1e-6:
            return v / n
