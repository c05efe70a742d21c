"""Forward kinematics and the geometric Jacobian, plus a finite-difference
Jacobian used as an independent cross-check."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import KinematicChain
from .transforms import quaternion_from_rotation, rotation_about_axis, rotation_log

DEFAULT_FD_STEP = 1e-6


@dataclass(frozen=True)
class Pose:
    """End-effector position and orientation in the base frame."""

    position: np.ndarray
    rotation: np.ndarray

    @property
    def quaternion(self) -> np.ndarray:
        """Unit quaternion (w, x, y, z) of the orientation."""
        return quaternion_from_rotation(self.rotation)


@dataclass(frozen=True)
class ChainFrames:
    """Base-frame placement of every joint and link frame at one configuration.

    ``joint_origins[i]``/``joint_axes[i]`` locate joint i (the axis is already
    rotated into the base frame); ``link_rotations[i]`` orients link i's frame,
    which shares its origin with joint i.
    """

    joint_origins: np.ndarray  # (n, 3)
    joint_axes: np.ndarray  # (n, 3)
    link_rotations: np.ndarray  # (n, 3, 3)
    ee: Pose


def _check_q(chain: KinematicChain, q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (chain.n,):
        raise ValueError(f"expected joint vector of length {chain.n}, got shape {q.shape}")
    return q


def chain_frames(chain: KinematicChain, q: np.ndarray) -> ChainFrames:
    """Single forward pass computing every frame needed by the Jacobian and
    the inertia computations."""
    q = _check_q(chain, q)
    n = chain.n
    origins = np.empty((n, 3))
    axes = np.empty((n, 3))
    rotations = np.empty((n, 3, 3))

    # Composed with raw arrays; this is the scalar hot path.
    rot = np.eye(3)
    pos = np.zeros(3)
    for i, joint in enumerate(chain.joints):
        pos = rot @ joint.origin.translation + pos
        rot = rot @ joint.origin.rotation
        origins[i] = pos
        axes[i] = rot @ joint.axis
        rot = rot @ rotation_about_axis(joint.axis, q[i])
        rotations[i] = rot

    return ChainFrames(
        joint_origins=origins,
        joint_axes=axes,
        link_rotations=rotations,
        ee=Pose(
            position=rot @ chain.tool.translation + pos,
            rotation=rot @ chain.tool.rotation,
        ),
    )


def forward_kinematics(chain: KinematicChain, q: np.ndarray) -> Pose:
    """End-effector pose in the base frame."""
    return chain_frames(chain, q).ee


def geometric_jacobian(chain: KinematicChain, q: np.ndarray) -> np.ndarray:
    """6 x n geometric Jacobian at the end-effector, base frame, rows ordered
    [linear; angular]: column i is [z_i x (p_e - p_i); z_i]."""
    frames = chain_frames(chain, q)
    return _jacobian_to_point(frames, chain.n, frames.ee.position)


def _jacobian_to_point(frames: ChainFrames, upto: int, point: np.ndarray) -> np.ndarray:
    """Jacobian of a point rigidly attached to link ``upto - 1``."""
    n = frames.joint_origins.shape[0]
    jac = np.zeros((6, n))
    arms = point[None, :] - frames.joint_origins[:upto]
    jac[:3, :upto] = np.cross(frames.joint_axes[:upto], arms).T
    jac[3:, :upto] = frames.joint_axes[:upto].T
    return jac


def link_com_jacobian(chain: KinematicChain, frames: ChainFrames, link: int) -> np.ndarray:
    """Jacobian of link ``link``'s center of mass (joints past it contribute
    zero columns)."""
    com = frames.link_rotations[link] @ chain.links[link].com + frames.joint_origins[link]
    return _jacobian_to_point(frames, link + 1, com)


def fd_jacobian_oracle(
    chain: KinematicChain, q: np.ndarray, h: float = DEFAULT_FD_STEP
) -> np.ndarray:
    """Central-difference Jacobian from forward kinematics only.

    The angular block comes from the rotation-difference logarithm divided by
    the step, so it is independent of the axis bookkeeping in
    :func:`geometric_jacobian`.
    """
    if not h > 0.0:
        raise ValueError("finite-difference step must be positive")
    q = _check_q(chain, q)
    jac = np.empty((6, chain.n))
    for i in range(chain.n):
        dq = np.zeros(chain.n)
        dq[i] = h
        plus = forward_kinematics(chain, q + dq)
        minus = forward_kinematics(chain, q - dq)
        jac[:3, i] = (plus.position - minus.position) / (2.0 * h)
        jac[3:, i] = rotation_log(plus.rotation @ minus.rotation.T) / (2.0 * h)
    return jac


def pose_error(target: Pose, current: Pose) -> np.ndarray:
    """6-vector [position difference; rotation-vector log of R_t R_c^T],
    both expressed in the base frame."""
    return np.concatenate(
        [
            target.position - current.position,
            rotation_log(target.rotation @ current.rotation.T),
        ]
    )
