import numpy as np
import pytest

from virtdyn import (
    DivergenceError,
    MappingSpec,
    SingularConfigurationError,
    VirtualModelParams,
    build_virtual_chain,
    closed_loop_simulate,
    forward_kinematics,
    geometric_jacobian,
    joint_space_inertia,
    mapping_matrix_a,
    mapping_matrix_b,
    sdls_solve,
)
from virtdyn.dynamics import solve_spd
from virtdyn.mappings import dls_matrix

STRETCHED_Q = np.array([0.3, -np.pi / 2, 0.0, 0.4, 1.1, 0.7])
NOMINAL_Q = np.array([0.2, -1.1, 1.3, -0.6, 1.0, 0.4])


def svd_filter_oracle(jac, alpha):
    u, s, vt = np.linalg.svd(jac)
    return vt.T @ np.diag(s / (s**2 + alpha**2)) @ u.T


class TestMappingSpec:
    def test_requires_method_parameters(self):
        with pytest.raises(ValueError):
            MappingSpec("DLS")
        with pytest.raises(ValueError):
            MappingSpec("FD")
        with pytest.raises(ValueError):
            MappingSpec("SDLS")

    def test_rejects_foreign_parameters(self):
        with pytest.raises(ValueError):
            MappingSpec("JI", alpha=0.1)
        with pytest.raises(ValueError):
            MappingSpec("DLS", alpha=0.1, gamma=2.0)

    def test_rejects_invalid_values(self):
        with pytest.raises(ValueError):
            MappingSpec("DLS", alpha=-0.1)
        with pytest.raises(ValueError):
            MappingSpec("FD", gamma=0.0)
        with pytest.raises(ValueError):
            MappingSpec("XX")

    def test_labels(self):
        assert MappingSpec.dls(0.1).label() == "DLS(alpha=0.1)"
        assert MappingSpec.fd(1000).label() == "FD(gamma=1000)"
        assert MappingSpec.ji().label() == "JI"


class TestTypeA:
    def test_ji_is_inverse(self, ur10):
        jac = geometric_jacobian(ur10, NOMINAL_Q)
        mapping = mapping_matrix_a(ur10, NOMINAL_Q, MappingSpec.ji())
        assert mapping.kind == "a"
        assert np.abs(jac @ mapping.matrix - np.eye(6)).max() < 1e-9

    def test_ji_raises_at_singularity(self, ur10):
        with pytest.raises(SingularConfigurationError):
            mapping_matrix_a(ur10, STRETCHED_Q, MappingSpec.ji())

    def test_dls_zero_alpha_degrades_to_ji(self, ur10):
        ji = mapping_matrix_a(ur10, NOMINAL_Q, MappingSpec.ji()).matrix
        dls = mapping_matrix_a(ur10, NOMINAL_Q, MappingSpec.dls(0.0)).matrix
        assert np.abs(ji - dls).max() < 1e-12
        with pytest.raises(SingularConfigurationError):
            mapping_matrix_a(ur10, STRETCHED_Q, MappingSpec.dls(0.0))

    def test_dls_small_alpha_converges_to_ji(self, ur10):
        ji = mapping_matrix_a(ur10, NOMINAL_Q, MappingSpec.ji()).matrix
        dls = mapping_matrix_a(ur10, NOMINAL_Q, MappingSpec.dls(1e-8)).matrix
        assert np.abs(ji - dls).max() < 1e-6

    @pytest.mark.parametrize("alpha", [1e-3, 0.1, 1.1])
    def test_dls_matches_svd_filter(self, ur10, rng, alpha):
        for _ in range(20):
            q = rng.uniform(-np.pi, np.pi, 6)
            jac = geometric_jacobian(ur10, q)
            assert np.abs(dls_matrix(jac, alpha) - svd_filter_oracle(jac, alpha)).max() < 1e-9
        jac = geometric_jacobian(ur10, STRETCHED_Q)
        assert np.abs(dls_matrix(jac, alpha) - svd_filter_oracle(jac, alpha)).max() < 1e-9

    def test_dls_monotone_damping(self, ur10, rng):
        for _ in range(10):
            q = rng.uniform(-np.pi, np.pi, 6)
            jac = geometric_jacobian(ur10, q)
            s1 = np.linalg.svd(dls_matrix(jac, 0.05), compute_uv=False)
            s2 = np.linalg.svd(dls_matrix(jac, 0.3), compute_uv=False)
            assert np.all(s1 >= s2 - 1e-12)

    def test_fd_is_inertia_solve(self, ur10):
        chain = build_virtual_chain(ur10, VirtualModelParams(gamma=1.0))
        jac = geometric_jacobian(chain, NOMINAL_Q)
        inertia = joint_space_inertia(chain, NOMINAL_Q)
        mapping = mapping_matrix_a(chain, NOMINAL_Q, MappingSpec.fd(1.0))
        assert np.abs(inertia @ mapping.matrix - jac.T).max() < 1e-9

    def test_sdls_matrix_request_rejected(self, ur10):
        with pytest.raises(ValueError, match="sdls_solve"):
            mapping_matrix_a(ur10, NOMINAL_Q, MappingSpec.sdls(0.3))


class TestTypeB:
    def test_ji_identity(self, ur10, rng):
        for _ in range(10):
            q = rng.uniform(-np.pi, np.pi, 6)
            mapping = mapping_matrix_b(ur10, q, MappingSpec.ji())
            assert mapping.kind == "b"
            assert np.abs(mapping.matrix - np.eye(6)).max() < 1e-9

    @pytest.mark.parametrize("method", ["JT", "FD"])
    def test_symmetric_positive_semidefinite(self, ur10, rng, method):
        chain = build_virtual_chain(ur10, VirtualModelParams(gamma=10.0))
        spec = MappingSpec.jt() if method == "JT" else MappingSpec.fd(10.0)
        for _ in range(10):
            q = rng.uniform(-np.pi, np.pi, 6)
            m = mapping_matrix_b(chain, q, spec).matrix
            assert np.allclose(m, m.T, atol=1e-9)
            assert np.linalg.eigvalsh(m)[0] > -1e-10

    def test_fd_consistency_with_operational_inertia(self, ur10, rng):
        # J (H^-1 J^T f) must equal the type (b) matrix applied to f.
        chain = build_virtual_chain(ur10, VirtualModelParams(gamma=100.0))
        for _ in range(10):
            q = rng.uniform(-np.pi, np.pi, 6)
            wrench = rng.normal(size=6)
            jac = geometric_jacobian(chain, q)
            qdd = solve_spd(joint_space_inertia(chain, q), jac.T @ wrench)
            lam_inv = mapping_matrix_b(chain, q, MappingSpec.fd(100.0)).matrix
            assert np.abs(jac @ qdd - lam_inv @ wrench).max() < 1e-9

    def test_fd_high_gamma_decouples(self, ur10, rng):
        chain = build_virtual_chain(ur10, VirtualModelParams(gamma=1e3))
        acc = np.zeros((6, 6))
        n = 3000
        for _ in range(n):
            q = rng.uniform(-np.pi, np.pi, 6)
            acc += mapping_matrix_b(chain, q, MappingSpec.fd(1e3)).matrix
        mean = acc / n
        diag_mean = np.trace(mean) / 6.0
        off = mean - np.diag(np.diag(mean))
        assert np.abs(off).max() < 0.05 * diag_mean


class TestSdls:
    def test_equals_ji_with_generous_limit(self, ur10):
        jac = geometric_jacobian(ur10, NOMINAL_Q)
        dx = np.array([0.001, -0.002, 0.001, 0.0, 0.001, -0.001])
        step = sdls_solve(ur10, NOMINAL_Q, dx, limit=1e6)
        assert np.abs(step - np.linalg.solve(jac, dx)).max() < 1e-9

    def test_bounded_at_singularity(self, ur10):
        step = sdls_solve(ur10, STRETCHED_Q, np.ones(6), limit=0.3)
        assert np.all(np.isfinite(step))
        assert np.abs(step).max() <= 0.3 + 1e-12

    def test_zero_input_zero_output(self, ur10):
        assert np.all(sdls_solve(ur10, NOMINAL_Q, np.zeros(6), limit=0.3) == 0.0)

    def test_rejects_bad_limit(self, ur10):
        with pytest.raises(ValueError):
            sdls_solve(ur10, NOMINAL_Q, np.ones(6), limit=0.0)


class TestClosedLoop:
    def test_fixed_point(self, ur10):
        q0 = NOMINAL_Q
        target = forward_kinematics(ur10, q0)
        result = closed_loop_simulate(
            ur10, VirtualModelParams(1e3), q0, target, 10.0 * np.eye(6), 1e-3, 50
        )
        assert np.allclose(result.error_norms, 0.0)
        assert np.allclose(result.joints[-1], q0)

    def test_converges_to_reachable_target(self, ur10):
        target = forward_kinematics(ur10, np.array([0.8, -0.9, 1.1, -0.4, 0.7, 0.5]))
        result = closed_loop_simulate(
            ur10,
            VirtualModelParams(1e3),
            NOMINAL_Q,
            target,
            10.0 * np.eye(6),
            1e-3,
            20000,
            stop_below=1e-4,
        )
        assert result.converged_at is not None
        assert result.final_error < 1e-4

    def test_error_strictly_decreasing_after_transient(self, ur10):
        target = forward_kinematics(ur10, np.array([0.5, -1.0, 1.2, -0.3, 0.8, 0.2]))
        result = closed_loop_simulate(
            ur10, VirtualModelParams(1e3), NOMINAL_Q, target, 10.0 * np.eye(6), 1e-3, 2000
        )
        tail = result.error_norms[10:]
        assert np.all(np.diff(tail) < 0.0)

    @pytest.mark.parametrize(
        "gain",
        [
            np.diag([1.0, 1.0, 1.0, 1.0, 1.0, -1.0]),  # indefinite
            np.eye(6) + np.triu(np.ones((6, 6)), 1),  # nonsymmetric
        ],
    )
    def test_rejects_bad_gain(self, ur10, gain):
        target = forward_kinematics(ur10, NOMINAL_Q)
        with pytest.raises(ValueError):
            closed_loop_simulate(
                ur10, VirtualModelParams(1e3), NOMINAL_Q, target, gain, 1e-3, 10
            )

    def test_rejects_bad_dt_and_steps(self, ur10):
        target = forward_kinematics(ur10, NOMINAL_Q)
        with pytest.raises(ValueError):
            closed_loop_simulate(
                ur10, VirtualModelParams(1e3), NOMINAL_Q, target, np.eye(6), 0.0, 10
            )
        with pytest.raises(ValueError):
            closed_loop_simulate(
                ur10, VirtualModelParams(1e3), NOMINAL_Q, target, np.eye(6), 1e-3, 0
            )

    def test_divergence_detection(self, ur10):
        # Start almost on target (tiny initial error) and destabilize the
        # accumulate variant with a huge gain: the error grows well past ten
        # times its initial value and the detector must abort with the
        # partial trace.
        target = forward_kinematics(ur10, NOMINAL_Q + 1e-4)
        with pytest.raises(DivergenceError) as excinfo:
            closed_loop_simulate(
                ur10,
                VirtualModelParams(1e3),
                NOMINAL_Q,
                target,
                5e4 * np.eye(6),
                5e-2,
                5000,
                rest_each_cycle=False,
            )
        assert excinfo.value.result is not None
        assert excinfo.value.result.error_norms.shape[0] >= 100

    def test_oscillates_without_rest(self, ur10):
        # The accumulate variant behaves like an undamped oscillation: the
        # error must come back up after its first dip.
        target = forward_kinematics(ur10, np.array([0.5, -1.0, 1.2, -0.3, 0.8, 0.2]))
        result = closed_loop_simulate(
            ur10,
            VirtualModelParams(1e3),
            NOMINAL_Q,
            target,
            10.0 * np.eye(6),
            1e-3,
            5000,
            rest_each_cycle=False,
        )
        errors = result.error_norms
        assert errors.min() < 0.5 * errors[0]
        assert errors[-1] > 2.0 * errors.min()
