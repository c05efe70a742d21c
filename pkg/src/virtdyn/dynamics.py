"""Joint-space inertia matrix via the composite rigid body algorithm, with a
link-Jacobian summation oracle and a positive definite inverse."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .chain import KinematicChain
from .kinematics import ChainFrames, chain_frames, link_com_jacobian
from .transforms import skew


def spatial_inertia_at_base(
    mass: float, com_base: np.ndarray, rot_inertia_base: np.ndarray
) -> np.ndarray:
    """6x6 spatial inertia of one rigid body, taken at the base-frame origin
    for twists ordered [linear; angular].

    ``com_base`` is the center of mass in base coordinates and
    ``rot_inertia_base`` the rotational inertia about the center of mass,
    already rotated into the base frame.
    """
    c = skew(com_base)
    out = np.empty((6, 6))
    out[:3, :3] = mass * np.eye(3)
    out[:3, 3:] = -mass * c
    out[3:, :3] = mass * c
    out[3:, 3:] = rot_inertia_base + mass * (c.T @ c)
    return out


def _joint_subspaces(frames: ChainFrames) -> np.ndarray:
    """Motion subspace of every revolute joint as a base-origin twist:
    S_i = [-z_i x p_i; z_i], shape (n, 6)."""
    n = frames.joint_origins.shape[0]
    s = np.empty((n, 6))
    s[:, :3] = -np.cross(frames.joint_axes, frames.joint_origins)
    s[:, 3:] = frames.joint_axes
    return s


def _link_spatial_inertias(chain: KinematicChain, frames: ChainFrames) -> np.ndarray:
    out = np.empty((chain.n, 6, 6))
    for i, link in enumerate(chain.links):
        r = frames.link_rotations[i]
        com_base = r @ link.com + frames.joint_origins[i]
        out[i] = spatial_inertia_at_base(link.mass, com_base, r @ link.rot_inertia @ r.T)
    return out


def joint_space_inertia(chain: KinematicChain, q: np.ndarray) -> np.ndarray:
    """H(q) by the composite rigid body algorithm.

    All spatial quantities are expressed at the base-frame origin, so the
    composite inertia of the subtree rooted at joint i is a plain suffix sum
    and H_ij = S_i^T I^c_j S_j for i <= j.
    """
    frames = chain_frames(chain, q)
    s = _joint_subspaces(frames)
    inertias = _link_spatial_inertias(chain, frames)
    composites = np.cumsum(inertias[::-1], axis=0)[::-1]  # I^c_i = sum_{j>=i} I_j

    n = chain.n
    h = np.empty((n, n))
    for j in range(n):
        f = composites[j] @ s[j]
        for i in range(j + 1):
            h[i, j] = s[i] @ f
            h[j, i] = h[i, j]
    return h


def inertia_oracle(chain: KinematicChain, q: np.ndarray) -> np.ndarray:
    """Independent route to H(q): sum of J_i^T I_i J_i over links, with J_i the
    Jacobian of link i's center of mass and I_i the spatial inertia taken at
    that point (block diagonal in base coordinates)."""
    frames = chain_frames(chain, q)
    n = chain.n
    h = np.zeros((n, n))
    for i, link in enumerate(chain.links):
        jac = link_com_jacobian(chain, frames, i)
        r = frames.link_rotations[i]
        inertia = np.zeros((6, 6))
        inertia[:3, :3] = link.mass * np.eye(3)
        inertia[3:, 3:] = r @ link.rot_inertia @ r.T
        h += jac.T @ inertia @ jac
    return h


def inverse_inertia(h: np.ndarray) -> np.ndarray:
    """H^-1 through a Cholesky factorization; rejects non-SPD input."""
    h = np.asarray(h, dtype=float)
    if not np.allclose(h, h.T, atol=1e-9):
        raise ValueError("inertia matrix must be symmetric")
    try:
        factor = scipy.linalg.cho_factor(h, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise ValueError("inertia matrix is not positive definite") from exc
    return scipy.linalg.cho_solve(factor, np.eye(h.shape[0]))


def solve_spd(h: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve H x = rhs for symmetric positive definite H (no explicit inverse)."""
    try:
        factor = scipy.linalg.cho_factor(np.asarray(h, dtype=float), lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise ValueError("matrix is not positive definite") from exc
    return scipy.linalg.cho_solve(factor, rhs)
