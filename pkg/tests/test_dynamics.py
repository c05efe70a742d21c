import numpy as np
import pytest

from virtdyn import (
    JointDescriptor,
    KinematicChain,
    LinkInertia,
    Transform,
    VirtualModelParams,
    build_virtual_chain,
    inertia_oracle,
    inverse_inertia,
    joint_space_inertia,
)
from virtdyn.dynamics import spatial_inertia_at_base
from virtdyn.kinematics import chain_frames, link_com_jacobian


def pendulum(mass=2.0, length=0.7, ip=0.3):
    return KinematicChain(
        joints=(JointDescriptor(origin=Transform.identity()),),
        links=(
            LinkInertia(
                mass=mass, com=np.array([length, 0.0, 0.0]), rot_inertia=ip * np.eye(3)
            ),
        ),
        tool=Transform(np.eye(3), np.array([length, 0.0, 0.0])),
    )


@pytest.fixture(scope="module")
def virtual_ur10(ur10):
    return build_virtual_chain(ur10, VirtualModelParams(gamma=1.0))


def test_pendulum_inertia_analytic():
    m, l, ip = 2.0, 0.7, 0.3
    h = joint_space_inertia(pendulum(m, l, ip), np.array([0.4]))
    assert np.isclose(h[0, 0], m * l * l + ip, atol=1e-12)


def test_crba_matches_link_jacobian_oracle(virtual_ur10, rng):
    worst = 0.0
    for _ in range(200):
        q = rng.uniform(-np.pi, np.pi, 6)
        diff = np.abs(
            joint_space_inertia(virtual_ur10, q) - inertia_oracle(virtual_ur10, q)
        ).max()
        worst = max(worst, diff)
    assert worst < 1e-9


def test_inertia_symmetric_positive_definite(virtual_ur10, rng):
    for _ in range(50):
        h = joint_space_inertia(virtual_ur10, rng.uniform(-np.pi, np.pi, 6))
        assert np.allclose(h, h.T, atol=1e-9)
        assert np.linalg.eigvalsh(h)[0] > 0.0


def test_inertia_oracle_pendulum():
    m, l, ip = 1.5, 0.4, 0.05
    h = inertia_oracle(pendulum(m, l, ip), np.array([1.1]))
    assert np.isclose(h[0, 0], m * l * l + ip, atol=1e-12)


def test_inertia_linear_in_mass(ur10, rng):
    base = build_virtual_chain(ur10, VirtualModelParams(gamma=1.0, m_e=1.0, ip_e=1.0))
    scaled = build_virtual_chain(ur10, VirtualModelParams(gamma=1.0, m_e=3.0, ip_e=3.0))
    q = rng.uniform(-np.pi, np.pi, 6)
    assert np.allclose(
        3.0 * joint_space_inertia(base, q), joint_space_inertia(scaled, q), atol=1e-12
    )


def test_inertia_gamma_scaling_structure(ur10, rng):
    # H(gamma) = H_ee + (1/gamma) * M, so gamma-differences are proportional.
    q = rng.uniform(-np.pi, np.pi, 6)
    h1 = joint_space_inertia(build_virtual_chain(ur10, VirtualModelParams(1.0)), q)
    h2 = joint_space_inertia(build_virtual_chain(ur10, VirtualModelParams(2.0)), q)
    h3 = joint_space_inertia(build_virtual_chain(ur10, VirtualModelParams(3.0)), q)
    lhs = (h1 - h2) / (1.0 - 1.0 / 2.0)
    rhs = (h1 - h3) / (1.0 - 1.0 / 3.0)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_kinetic_energy_grounding(virtual_ur10, rng):
    for _ in range(20):
        q = rng.uniform(-np.pi, np.pi, 6)
        qd = rng.normal(size=6)
        h = joint_space_inertia(virtual_ur10, q)
        frames = chain_frames(virtual_ur10, q)
        total = 0.0
        for i, link in enumerate(virtual_ur10.links):
            jac = link_com_jacobian(virtual_ur10, frames, i)
            vel = jac @ qd
            rot = frames.link_rotations[i]
            inertia_base = rot @ link.rot_inertia @ rot.T
            total += link.mass * vel[:3] @ vel[:3] + vel[3:] @ inertia_base @ vel[3:]
        assert np.isclose(qd @ h @ qd, total, atol=1e-9)


def test_spatial_inertia_properties(rng):
    inertia = spatial_inertia_at_base(2.0, rng.normal(size=3), 0.4 * np.eye(3))
    assert np.allclose(inertia, inertia.T, atol=1e-12)
    assert np.linalg.eigvalsh(inertia)[0] > 0.0


def test_inverse_inertia_identity_and_diagonal():
    assert np.allclose(inverse_inertia(np.eye(4)), np.eye(4))
    assert np.allclose(
        inverse_inertia(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]), atol=1e-15
    )


def test_inverse_inertia_residual_high_gamma(ur10, rng):
    chain = build_virtual_chain(ur10, VirtualModelParams(gamma=1e3))
    h = joint_space_inertia(chain, rng.uniform(-np.pi, np.pi, 6))
    h_inv = inverse_inertia(h)
    assert np.abs(h @ h_inv - np.eye(6)).max() < 1e-9


def test_inverse_inertia_rejects_non_spd():
    with pytest.raises(ValueError):
        inverse_inertia(np.diag([1.0, -1.0]))
    with pytest.raises(ValueError):
        inverse_inertia(np.array([[1.0, 2.0], [0.0, 1.0]]))
