"""Vectorized twins of the per-configuration kinematics/dynamics routines.

The sampling experiments evaluate 1e5+ configurations; these helpers run the
same math batched over a leading sample axis.  Each function is cross-checked
against its scalar counterpart in the test suite.
"""

from __future__ import annotations

import numpy as np

from .chain import KinematicChain
from .transforms import skew

_EYE3 = np.eye(3)


def _axis_rotation_batch(axis: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """Rodrigues rotation about one fixed axis for a batch of angles."""
    c = np.cos(angles)[:, None, None]
    s = np.sin(angles)[:, None, None]
    k = skew(axis)
    outer = np.outer(axis, axis)
    return c * _EYE3 + s * k + (1.0 - c) * outer


def frames_batch(chain: KinematicChain, qs: np.ndarray):
    """Batched chain walk.

    Returns (joint_origins (m,n,3), joint_axes (m,n,3),
    link_rotations (m,n,3,3), ee_positions (m,3), ee_rotations (m,3,3)).
    """
    qs = np.asarray(qs, dtype=float)
    m, n = qs.shape
    if n != chain.n:
        raise ValueError(f"expected joint dimension {chain.n}, got {n}")

    origins = np.empty((m, n, 3))
    axes = np.empty((m, n, 3))
    link_rot = np.empty((m, n, 3, 3))

    rot = np.broadcast_to(_EYE3, (m, 3, 3)).copy()
    pos = np.zeros((m, 3))
    for i, joint in enumerate(chain.joints):
        pos = pos + np.einsum("mij,j->mi", rot, joint.origin.translation)
        rot = np.einsum("mij,jk->mik", rot, joint.origin.rotation)
        origins[:, i] = pos
        axes[:, i] = np.einsum("mij,j->mi", rot, joint.axis)
        rot = np.einsum("mij,mjk->mik", rot, _axis_rotation_batch(joint.axis, qs[:, i]))
        link_rot[:, i] = rot

    ee_pos = pos + np.einsum("mij,j->mi", rot, chain.tool.translation)
    ee_rot = np.einsum("mij,jk->mik", rot, chain.tool.rotation)
    return origins, axes, link_rot, ee_pos, ee_rot


def jacobian_batch(chain: KinematicChain, qs: np.ndarray) -> np.ndarray:
    """(m, 6, n) geometric Jacobians at the end-effector."""
    origins, axes, _, ee_pos, _ = frames_batch(chain, qs)
    arms = ee_pos[:, None, :] - origins
    jac = np.empty((qs.shape[0], 6, chain.n))
    jac[:, :3, :] = np.cross(axes, arms).transpose(0, 2, 1)
    jac[:, 3:, :] = axes.transpose(0, 2, 1)
    return jac


def det_jacobian_batch(chain: KinematicChain, qs: np.ndarray) -> np.ndarray:
    """|det J| for every configuration in the batch."""
    return np.abs(np.linalg.det(jacobian_batch(chain, qs)))


def _skew_batch(v: np.ndarray) -> np.ndarray:
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def inertia_batch(chain: KinematicChain, qs: np.ndarray) -> np.ndarray:
    """(m, n, n) joint-space inertia matrices (same composite rigid body
    recursion as :func:`virtdyn.dynamics.joint_space_inertia`, batched)."""
    qs = np.asarray(qs, dtype=float)
    m, n = qs.shape
    origins, axes, link_rot, _, _ = frames_batch(chain, qs)

    masses = np.array([link.mass for link in chain.links])
    coms = np.stack([link.com for link in chain.links])
    inertias = np.stack([link.rot_inertia for link in chain.links])

    com_base = np.einsum("mnij,nj->mni", link_rot, coms) + origins
    rotated = np.einsum("mnij,njk->mnik", link_rot, inertias)
    rot_in_base = np.einsum("mnik,mnlk->mnil", rotated, link_rot)

    c = _skew_batch(com_base)
    spatial = np.empty((m, n, 6, 6))
    spatial[..., :3, :3] = masses[None, :, None, None] * _EYE3
    spatial[..., :3, 3:] = -masses[None, :, None, None] * c
    spatial[..., 3:, :3] = masses[None, :, None, None] * c
    spatial[..., 3:, 3:] = rot_in_base + masses[None, :, None, None] * (
        c.transpose(0, 1, 3, 2) @ c
    )

    composites = np.cumsum(spatial[:, ::-1], axis=1)[:, ::-1]

    subspaces = np.empty((m, n, 6))
    subspaces[..., :3] = -np.cross(axes, origins)
    subspaces[..., 3:] = axes

    forces = np.einsum("mnab,mnb->mna", composites, subspaces)
    cross_terms = np.einsum("mia,mja->mij", subspaces, forces)
    upper = np.triu(cross_terms)  # valid for i <= j
    return upper + np.triu(cross_terms, 1).transpose(0, 2, 1)


def dls_matrix_batch(jacs: np.ndarray, alpha: float) -> np.ndarray:
    """Batched (J^T J + alpha^2 I)^-1 J^T via QR of the stacked damped system
    (same route as the scalar implementation)."""
    m, rows, n = jacs.shape
    stacked = np.concatenate(
        [jacs, np.broadcast_to(alpha * np.eye(n), (m, n, n))], axis=1
    )
    q, r = np.linalg.qr(stacked)
    return np.linalg.solve(r, q[:, :rows, :].transpose(0, 2, 1))


def fd_matrix_batch(inertias: np.ndarray, jacs: np.ndarray) -> np.ndarray:
    """Batched H^-1 J^T."""
    return np.linalg.solve(inertias, jacs.transpose(0, 2, 1))
