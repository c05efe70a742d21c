import numpy as np
import pytest

from virtdyn import (
    KinematicChain,
    LinkInertia,
    VirtualModelParams,
    build_virtual_chain,
    geometric_jacobian,
    joint_space_inertia,
    sdls_solve,
)
from virtdyn import fastpath
from virtdyn.dynamics import solve_spd
from virtdyn.mappings import dls_matrix


@pytest.fixture(scope="module")
def vchain(ur10):
    return build_virtual_chain(ur10, VirtualModelParams(gamma=1e3))


@pytest.fixture(scope="module")
def data(vchain):
    d = fastpath.chain_data(vchain)
    fastpath.warmup(d)
    return d


def test_jacobian_kernel_matches_reference(vchain, data, rng):
    for _ in range(30):
        q = rng.uniform(-np.pi, np.pi, 6)
        assert np.abs(fastpath.jacobian(data, q) - geometric_jacobian(vchain, q)).max() < 1e-12


def test_inertia_kernel_matches_reference(vchain, data, rng):
    for _ in range(30):
        q = rng.uniform(-np.pi, np.pi, 6)
        _, inertia = fastpath.jacobian_and_inertia(data, q)
        assert np.abs(inertia - joint_space_inertia(vchain, q)).max() < 1e-12


def test_inertia_kernel_general_links(ur10, rng):
    links = tuple(
        LinkInertia(
            mass=1.0 + i,
            com=np.array([0.1 * i, -0.05, 0.02 * i]),
            rot_inertia=np.diag([0.1 + 0.02 * i, 0.2, 0.15]),
        )
        for i in range(6)
    )
    chain = KinematicChain(joints=ur10.joints, links=links, tool=ur10.tool)
    gdata = fastpath.chain_data(chain)
    for _ in range(20):
        q = rng.uniform(-np.pi, np.pi, 6)
        _, inertia = fastpath.jacobian_and_inertia(gdata, q)
        assert np.abs(inertia - joint_space_inertia(chain, q)).max() < 1e-12


def test_qdd_kernels_match_references(vchain, data, rng):
    wrench = np.ones(6)
    for _ in range(30):
        q = rng.uniform(-np.pi, np.pi, 6)
        jac = geometric_jacobian(vchain, q)
        inertia = joint_space_inertia(vchain, q)

        ji = np.linalg.solve(jac, wrench)
        assert np.abs(fastpath.qdd_ji(data, q, wrench) - ji).max() < 1e-9 * max(
            1.0, np.abs(ji).max()
        )
        assert np.abs(fastpath.qdd_jt(data, q, wrench) - jac.T @ wrench).max() < 1e-12
        dls = dls_matrix(jac, 0.1) @ wrench
        assert np.abs(fastpath.qdd_dls(data, q, wrench, 0.1) - dls).max() < 1e-10
        sdls = sdls_solve(vchain, q, wrench, 0.3)
        assert np.abs(fastpath.qdd_sdls(data, q, wrench, 0.3) - sdls).max() < 1e-12
        fd = solve_spd(inertia, jac.T @ wrench)
        assert np.abs(fastpath.qdd_fd(data, q, wrench) - fd).max() < 1e-9


def test_sdls_kernel_bounded_at_singularity(data):
    stretched = np.array([0.3, -np.pi / 2, 0.0, 0.4, 1.1, 0.7])
    step = fastpath.qdd_sdls(data, stretched, np.ones(6), 0.3)
    assert np.all(np.isfinite(step))
    assert np.abs(step).max() <= 0.3 + 1e-12
