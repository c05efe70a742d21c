import numpy as np

from virtdyn import VirtualModelParams, build_virtual_chain
from virtdyn.batched import (
    det_jacobian_batch,
    dls_matrix_batch,
    fd_matrix_batch,
    frames_batch,
    inertia_batch,
    jacobian_batch,
)
from virtdyn.dynamics import joint_space_inertia, solve_spd
from virtdyn.kinematics import chain_frames, geometric_jacobian
from virtdyn.mappings import dls_matrix


def test_frames_batch_matches_scalar(ur10, rng):
    qs = rng.uniform(-np.pi, np.pi, (40, 6))
    origins, axes, link_rot, ee_pos, ee_rot = frames_batch(ur10, qs)
    for k in range(qs.shape[0]):
        frames = chain_frames(ur10, qs[k])
        assert np.abs(origins[k] - frames.joint_origins).max() < 1e-13
        assert np.abs(axes[k] - frames.joint_axes).max() < 1e-13
        assert np.abs(link_rot[k] - frames.link_rotations).max() < 1e-13
        assert np.abs(ee_pos[k] - frames.ee.position).max() < 1e-13
        assert np.abs(ee_rot[k] - frames.ee.rotation).max() < 1e-13


def test_jacobian_batch_matches_scalar(ur10, rng):
    qs = rng.uniform(-np.pi, np.pi, (40, 6))
    jacs = jacobian_batch(ur10, qs)
    for k in range(qs.shape[0]):
        assert np.abs(jacs[k] - geometric_jacobian(ur10, qs[k])).max() < 1e-12


def test_det_batch_matches_scalar(ur10, rng):
    qs = rng.uniform(-np.pi, np.pi, (40, 6))
    dets = det_jacobian_batch(ur10, qs)
    for k in range(qs.shape[0]):
        expected = abs(np.linalg.det(geometric_jacobian(ur10, qs[k])))
        assert np.isclose(dets[k], expected, rtol=1e-10, atol=1e-15)


def test_inertia_batch_matches_scalar(ur10, rng):
    for gamma in (1.0, 100.0):
        chain = build_virtual_chain(ur10, VirtualModelParams(gamma))
        qs = rng.uniform(-np.pi, np.pi, (30, 6))
        inertias = inertia_batch(chain, qs)
        for k in range(qs.shape[0]):
            assert np.abs(inertias[k] - joint_space_inertia(chain, qs[k])).max() < 1e-12


def test_inertia_batch_general_links(ur10, rng):
    # Exercise nonzero COM offsets and anisotropic rotational inertia.
    from virtdyn import KinematicChain, LinkInertia

    links = tuple(
        LinkInertia(
            mass=0.5 + i,
            com=np.array([0.05 * i, -0.02, 0.03]),
            rot_inertia=np.diag([0.1, 0.2 + 0.01 * i, 0.15]),
        )
        for i in range(6)
    )
    chain = KinematicChain(joints=ur10.joints, links=links, tool=ur10.tool)
    qs = rng.uniform(-np.pi, np.pi, (20, 6))
    inertias = inertia_batch(chain, qs)
    for k in range(qs.shape[0]):
        assert np.abs(inertias[k] - joint_space_inertia(chain, qs[k])).max() < 1e-12


def test_dls_batch_matches_scalar(ur10, rng):
    qs = rng.uniform(-np.pi, np.pi, (30, 6))
    jacs = jacobian_batch(ur10, qs)
    for alpha in (1e-3, 0.1, 1.1):
        batch = dls_matrix_batch(jacs, alpha)
        for k in range(qs.shape[0]):
            assert np.abs(batch[k] - dls_matrix(jacs[k], alpha)).max() < 1e-10


def test_fd_batch_matches_scalar(ur10, rng):
    chain = build_virtual_chain(ur10, VirtualModelParams(1e3))
    qs = rng.uniform(-np.pi, np.pi, (30, 6))
    jacs = jacobian_batch(chain, qs)
    inertias = inertia_batch(chain, qs)
    batch = fd_matrix_batch(inertias, jacs)
    for k in range(qs.shape[0]):
        expected = solve_spd(inertias[k], jacs[k].T)
        assert np.abs(batch[k] - expected).max() < 1e-9
