"""Minimal SO(3)/SE(3) helpers shared by the kinematics and dynamics code."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def skew(v: np.ndarray) -> np.ndarray:
    """3x3 cross-product matrix: skew(v) @ u == np.cross(v, u)."""
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def rotation_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotation_y(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotation_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rpy_to_rotation(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Fixed-axis XYZ convention: R = Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    return rotation_z(yaw) @ rotation_y(pitch) @ rotation_x(roll)


def rotation_to_rpy(rotation: np.ndarray) -> tuple[float, float, float]:
    """Inverse of :func:`rpy_to_rotation`; pitch is returned in [-pi/2, pi/2]."""
    pitch = np.arctan2(-rotation[2, 0], np.hypot(rotation[0, 0], rotation[1, 0]))
    if abs(abs(pitch) - np.pi / 2) < 1e-12:
        # Gimbal lock: roll/yaw are coupled, pick yaw = 0.
        roll = np.arctan2(np.sign(np.sin(pitch)) * rotation[0, 1], rotation[1, 1])
        yaw = 0.0
    else:
        roll = np.arctan2(rotation[2, 1], rotation[2, 2])
        yaw = np.arctan2(rotation[1, 0], rotation[0, 0])
    return float(roll), float(pitch), float(yaw)


def rotation_about_axis(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation about a unit axis."""
    c, s = np.cos(angle), np.sin(angle)
    k = skew(axis)
    return np.eye(3) * c + s * k + (1.0 - c) * np.outer(axis, axis)


def rotation_log(rotation: np.ndarray) -> np.ndarray:
    """Rotation vector (axis * angle) of a rotation matrix, angle in [0, pi]."""
    cos_angle = np.clip((np.trace(rotation) - 1.0) / 2.0, -1.0, 1.0)
    angle = np.arccos(cos_angle)
    if angle < 1e-10:
        # First-order expansion; exact enough at this scale.
        return np.array(
            [
                rotation[2, 1] - rotation[1, 2],
                rotation[0, 2] - rotation[2, 0],
                rotation[1, 0] - rotation[0, 1],
            ]
        ) / 2.0
    if np.pi - angle < 1e-6:
        # Near pi the antisymmetric part vanishes; recover the axis from the
        # symmetric part R + I = 2 axis axis^T (up to sign, irrelevant at pi).
        sym = (rotation + np.eye(3)) / 2.0
        axis = np.sqrt(np.maximum(np.diag(sym), 0.0))
        major = int(np.argmax(axis))
        if axis[major] > 0.0:
            axis = sym[:, major] / axis[major]
        norm = np.linalg.norm(axis)
        if norm > 0.0:
            axis = axis / norm
        return axis * angle
    axis = np.array(
        [
            rotation[2, 1] - rotation[1, 2],
            rotation[0, 2] - rotation[2, 0],
            rotation[1, 0] - rotation[0, 1],
        ]
    ) / (2.0 * np.sin(angle))
    return axis * angle


def quaternion_from_rotation(rotation: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) with w >= 0."""
    trace = np.trace(rotation)
    if trace > 0.0:
        w = np.sqrt(1.0 + trace) / 2.0
        scale = 1.0 / (4.0 * w)
        q = np.array(
            [
                w,
                (rotation[2, 1] - rotation[1, 2]) * scale,
                (rotation[0, 2] - rotation[2, 0]) * scale,
                (rotation[1, 0] - rotation[0, 1]) * scale,
            ]
        )
    else:
        i = int(np.argmax(np.diag(rotation)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = np.sqrt(max(1.0 + rotation[i, i] - rotation[j, j] - rotation[k, k], 0.0)) * 2.0
        q = np.empty(4)
        q[0] = (rotation[k, j] - rotation[j, k]) / s
        q[1 + i] = s / 4.0
        q[1 + j] = (rotation[j, i] + rotation[i, j]) / s
        q[1 + k] = (rotation[k, i] + rotation[i, k]) / s
    if q[0] < 0.0:
        q = -q
    return q / np.linalg.norm(q)


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Transform:
    """Rigid transform (rotation + translation), composed with ``@``."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "rotation", _readonly(self.rotation))
        object.__setattr__(self, "translation", _readonly(self.translation))

    @staticmethod
    def identity() -> "Transform":
        return Transform()

    @staticmethod
    def from_xyz_rpy(xyz, rpy) -> "Transform":
        return Transform(rpy_to_rotation(*rpy), np.asarray(xyz, dtype=float))

    def __matmul__(self, other: "Transform") -> "Transform":
        return Transform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def apply(self, point: np.ndarray) -> np.ndarray:
        return self.rotation @ np.asarray(point, dtype=float) + self.translation

    def inverse(self) -> "Transform":
        rt = self.rotation.T
        return Transform(rt, -rt @ self.translation)

    def as_matrix(self) -> np.ndarray:
        out = np.eye(4)
        out[:3, :3] = self.rotation
        out[:3, 3] = self.translation
        return out
