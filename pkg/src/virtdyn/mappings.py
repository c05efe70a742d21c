"""Mapping matrices from Cartesian space to joint space (type a) and back to
Cartesian space (type b), the selectively damped least squares solver, and the
closed-loop convergence simulation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .chain import KinematicChain, VirtualModelParams, build_virtual_chain
from .dynamics import joint_space_inertia, solve_spd
from .kinematics import Pose, forward_kinematics, geometric_jacobian, pose_error

SINGULARITY_RATIO = 1e-12

METHODS = ("JI", "JT", "DLS", "SDLS", "FD")


class SingularConfigurationError(ValueError):
    """Raised when an exact Jacobian inverse is requested at a configuration
    where the Jacobian is numerically rank deficient."""


class DivergenceError(RuntimeError):
    """Raised when the closed-loop simulation detects sustained divergence.

    Carries the partial trajectory in ``result`` for diagnostics.
    """

    def __init__(self, message: str, result: "ClosedLoopResult | None" = None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class MappingSpec:
    """Tagged choice of mapping method with exactly its own parameters set."""

    method: str
    alpha: Optional[float] = None  # DLS damping
    gamma: Optional[float] = None  # FD mass ratio
    sdls_limit: Optional[float] = None  # SDLS max joint change, rad

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}, expected one of {METHODS}")
        expected = {"DLS": "alpha", "FD": "gamma", "SDLS": "sdls_limit"}.get(self.method)
        for name in ("alpha", "gamma", "sdls_limit"):
            value = getattr(self, name)
            if name == expected:
                if value is None:
                    raise ValueError(f"{self.method} requires {name}")
            elif value is not None:
                raise ValueError(f"{self.method} does not take {name}")
        if self.alpha is not None and self.alpha < 0.0:
            raise ValueError("alpha must be >= 0")
        if self.gamma is not None and not self.gamma > 0.0:
            raise ValueError("gamma must be > 0")
        if self.sdls_limit is not None and not self.sdls_limit > 0.0:
            raise ValueError("sdls_limit must be > 0")

    @staticmethod
    def ji() -> "MappingSpec":
        return MappingSpec("JI")

    @staticmethod
    def jt() -> "MappingSpec":
        return MappingSpec("JT")

    @staticmethod
    def dls(alpha: float) -> "MappingSpec":
        return MappingSpec("DLS", alpha=alpha)

    @staticmethod
    def fd(gamma: float) -> "MappingSpec":
        return MappingSpec("FD", gamma=gamma)

    @staticmethod
    def sdls(limit: float) -> "MappingSpec":
        return MappingSpec("SDLS", sdls_limit=limit)

    def label(self) -> str:
        if self.method == "DLS":
            return f"DLS(alpha={self.alpha:g})"
        if self.method == "FD":
            return f"FD(gamma={self.gamma:g})"
        if self.method == "SDLS":
            return f"SDLS(limit={self.sdls_limit:g})"
        return self.method


@dataclass(frozen=True)
class MappingMatrix:
    matrix: np.ndarray
    kind: str  # "a": Cartesian -> joint space, "b": Cartesian -> Cartesian


def _checked_jacobian_inverse(jac: np.ndarray) -> np.ndarray:
    sigmas = np.linalg.svd(jac, compute_uv=False)
    if sigmas[-1] <= SINGULARITY_RATIO * sigmas[0]:
        raise SingularConfigurationError(
            f"Jacobian is numerically singular (sigma_min/sigma_max = "
            f"{sigmas[-1] / sigmas[0]:.3e})"
        )
    return np.linalg.solve(jac, np.eye(jac.shape[0]))


def dls_matrix(jac: np.ndarray, alpha: float) -> np.ndarray:
    """(J^T J + alpha^2 I)^-1 J^T computed as the least-squares solution of the
    stacked system [J; alpha I] X = [I; 0] via QR.

    Forming the normal equations explicitly squares the conditioning and loses
    ~6 digits near singular configurations at small alpha; the QR route keeps
    the full damped accuracy.
    """
    if alpha == 0.0:
        return _checked_jacobian_inverse(jac)
    m, n = jac.shape
    stacked = np.vstack([jac, alpha * np.eye(n)])
    q, r = scipy.linalg.qr(stacked, mode="economic")
    return scipy.linalg.solve_triangular(r, q[:m, :].T)


def fd_matrix(chain: KinematicChain, q: np.ndarray, jac: np.ndarray) -> np.ndarray:
    """H(q)^-1 J^T for the chain's own mass distribution."""
    return solve_spd(joint_space_inertia(chain, q), jac.T)


def mapping_matrix_a(chain: KinematicChain, q: np.ndarray, spec: MappingSpec) -> MappingMatrix:
    """Cartesian-to-joint-space mapping matrix of the chosen method.

    For FD the chain must already carry the virtual mass distribution (see
    :func:`virtdyn.chain.build_virtual_chain`).  SDLS is a per-vector
    algorithm, not a matrix: use :func:`sdls_solve`.
    """
    if spec.method == "SDLS":
        raise ValueError("SDLS has no mapping matrix; use sdls_solve")
    jac = geometric_jacobian(chain, q)
    if jac.shape[0] != jac.shape[1]:
        raise ValueError("mapping matrices require a square Jacobian (n = 6)")
    if spec.method == "JI":
        matrix = _checked_jacobian_inverse(jac)
    elif spec.method == "JT":
        matrix = jac.T.copy()
    elif spec.method == "DLS":
        matrix = dls_matrix(jac, spec.alpha)
    else:  # FD
        matrix = fd_matrix(chain, q, jac)
    return MappingMatrix(matrix=matrix, kind="a")


def mapping_matrix_b(chain: KinematicChain, q: np.ndarray, spec: MappingSpec) -> MappingMatrix:
    """Cartesian-to-Cartesian composition J @ mapping_matrix_a."""
    inner = mapping_matrix_a(chain, q, spec)
    jac = geometric_jacobian(chain, q)
    return MappingMatrix(matrix=jac @ inner.matrix, kind="b")


def _clamp_max_abs(v: np.ndarray, bound: float) -> np.ndarray:
    worst = np.abs(v).max()
    if worst > bound:
        return v * (bound / worst)
    return v


def sdls_solve(
    chain: KinematicChain, q: np.ndarray, dx: np.ndarray, limit: float
) -> np.ndarray:
    """Selectively damped least squares step.

    Each singular direction of J contributes (u_i^T dx / sigma_i) v_i, clamped
    to its own bound min(1, N_i/M_i) * limit; the accumulated step is finally
    clamped to ``limit`` in the max-norm.  Zero singular directions are
    skipped, so the step is defined at singular configurations.
    """
    if not limit > 0.0:
        raise ValueError("limit must be positive")
    dx = np.asarray(dx, dtype=float)
    jac = geometric_jacobian(chain, q)
    u, sigmas, vt = np.linalg.svd(jac)
    joint_gains = np.linalg.norm(jac, axis=0)  # per-joint end-effector speed

    step = np.zeros(jac.shape[1])
    for i, sigma in enumerate(sigmas):
        if sigma <= SINGULARITY_RATIO * sigmas[0]:
            continue
        component = u[:, i] @ dx
        m_i = np.sum(np.abs(vt[i]) * joint_gains) / sigma
        bound_i = min(1.0, 1.0 / m_i) * limit
        step += _clamp_max_abs((component / sigma) * vt[i], bound_i)
    return _clamp_max_abs(step, limit)


@dataclass(frozen=True)
class ClosedLoopResult:
    """Joint trajectory and pose-error trace of one closed-loop run."""

    joints: np.ndarray  # (recorded_steps + 1, n)
    error_norms: np.ndarray  # (recorded_steps + 1,)
    converged_at: Optional[int] = None  # first step with error below stop_below

    @property
    def final_error(self) -> float:
        return float(self.error_norms[-1])


def _check_gain(gain: np.ndarray) -> np.ndarray:
    gain = np.asarray(gain, dtype=float)
    if gain.shape != (6, 6):
        raise ValueError("gain must be 6x6")
    if not np.allclose(gain, gain.T, atol=1e-9):
        raise ValueError("gain must be symmetric")
    if np.linalg.eigvalsh(gain)[0] <= 0.0:
        raise ValueError("gain must be positive definite")
    return gain


def closed_loop_simulate(
    chain: KinematicChain,
    params: VirtualModelParams,
    q0: np.ndarray,
    x_target: Pose,
    gain: np.ndarray,
    dt: float,
    steps: int,
    rest_each_cycle: bool = True,
    stop_below: Optional[float] = None,
) -> ClosedLoopResult:
    """Drive the virtual chain toward a target pose against an identity plant.

    Each cycle applies the wrench K e(q) to the virtual system and commands
    the resulting joint motion.  With ``rest_each_cycle`` (default) the system
    accelerates from rest every cycle and its instantaneous acceleration is
    commanded as the joint velocity reference, the asymptotically stable form;
    with ``rest_each_cycle=False`` the virtual velocity persists and the state
    is advanced by plain semi-implicit Euler, which behaves like an undamped
    oscillation around the target.

    Raises :class:`DivergenceError` once the error norm exceeds ten times the
    initial error for 100 consecutive steps.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    gain = _check_gain(gain)
    virtual = build_virtual_chain(chain, params)

    q = np.asarray(q0, dtype=float).copy()
    qd = np.zeros_like(q)
    errors = [float(np.linalg.norm(pose_error(x_target, forward_kinematics(virtual, q))))]
    trajectory = [q.copy()]
    divergence_bound = 10.0 * errors[0] + 1e-12
    over_bound_streak = 0
    converged_at = None

    for step in range(1, steps + 1):
        error = pose_error(x_target, forward_kinematics(virtual, q))
        jac = geometric_jacobian(virtual, q)
        qdd = solve_spd(joint_space_inertia(virtual, q), jac.T @ (gain @ error))
        if rest_each_cycle:
            qd = qdd
        else:
            qd = qd + qdd * dt
        q = q + qd * dt

        norm = float(
            np.linalg.norm(pose_error(x_target, forward_kinematics(virtual, q)))
        )
        trajectory.append(q.copy())
        errors.append(norm)

        if norm > divergence_bound:
            over_bound_streak += 1
            if over_bound_streak >= 100:
                raise DivergenceError(
                    f"error norm {norm:.3e} stayed above 10x the initial error "
                    f"for 100 consecutive steps (aborted at step {step})",
                    result=ClosedLoopResult(
                        joints=np.asarray(trajectory),
                        error_norms=np.asarray(errors),
                    ),
                )
        else:
            over_bound_streak = 0

        if stop_below is not None and norm < stop_below:
            converged_at = step
            break

    return ClosedLoopResult(
        joints=np.asarray(trajectory),
        error_norms=np.asarray(errors),
        converged_at=converged_at,
    )
