"""JIT-compiled twins of the mapping computations for the runtime benchmark.

The timing experiment measures the per-cycle cost of computing q_dd = M(q) f
for each method.  Interpreted numpy overhead (~hundreds of microseconds per
chain walk) would swamp the differences the benchmark is after, so the hot
kernels are compiled with numba.  Every kernel is cross-checked against its
reference implementation in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .chain import KinematicChain


@dataclass(frozen=True)
class ChainData:
    """Chain constants flattened into contiguous arrays for the kernels."""

    origin_rots: np.ndarray  # (n, 3, 3)
    origin_trans: np.ndarray  # (n, 3)
    axes: np.ndarray  # (n, 3)
    tool_trans: np.ndarray  # (3,)
    masses: np.ndarray  # (n,)
    coms: np.ndarray  # (n, 3)
    rot_inertias: np.ndarray  # (n, 3, 3)


def chain_data(chain: KinematicChain) -> ChainData:
    return ChainData(
        origin_rots=np.ascontiguousarray([j.origin.rotation for j in chain.joints]),
        origin_trans=np.ascontiguousarray([j.origin.translation for j in chain.joints]),
        axes=np.ascontiguousarray([j.axis for j in chain.joints]),
        tool_trans=np.ascontiguousarray(chain.tool.translation),
        masses=np.ascontiguousarray([l.mass for l in chain.links]),
        coms=np.ascontiguousarray([l.com for l in chain.links]),
        rot_inertias=np.ascontiguousarray([l.rot_inertia for l in chain.links]),
    )


@njit(cache=True)
def _axis_rotation(axis, angle):
    c = np.cos(angle)
    s = np.sin(angle)
    t = 1.0 - c
    ax, ay, az = axis[0], axis[1], axis[2]
    out = np.empty((3, 3))
    out[0, 0] = c + t * ax * ax
    out[0, 1] = t * ax * ay - s * az
    out[0, 2] = t * ax * az + s * ay
    out[1, 0] = t * ax * ay + s * az
    out[1, 1] = c + t * ay * ay
    out[1, 2] = t * ay * az - s * ax
    out[2, 0] = t * ax * az - s * ay
    out[2, 1] = t * ay * az + s * ax
    out[2, 2] = c + t * az * az
    return out


@njit(cache=True)
def _mat3_mul(a, b):
    out = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            out[i, j] = a[i, 0] * b[0, j] + a[i, 1] * b[1, j] + a[i, 2] * b[2, j]
    return out


@njit(cache=True)
def _mat3_vec(a, v):
    out = np.empty(3)
    for i in range(3):
        out[i] = a[i, 0] * v[0] + a[i, 1] * v[1] + a[i, 2] * v[2]
    return out


@njit(cache=True)
def _frames(q, origin_rots, origin_trans, axes_local):
    # Small fixed-size products are written out explicitly: numba would
    # otherwise dispatch every 3x3 matmul to BLAS, whose call overhead
    # dominates at this size.
    n = q.shape[0]
    origins = np.empty((n, 3))
    axes = np.empty((n, 3))
    rots = np.empty((n, 3, 3))
    rot = np.eye(3)
    pos = np.zeros(3)
    for i in range(n):
        pos = pos + _mat3_vec(rot, origin_trans[i])
        rot = _mat3_mul(rot, origin_rots[i])
        origins[i] = pos
        axes[i] = _mat3_vec(rot, axes_local[i])
        rot = _mat3_mul(rot, _axis_rotation(axes_local[i], q[i]))
        rots[i] = rot
    return origins, axes, rots, pos, rot


@njit(cache=True)
def _jacobian(q, origin_rots, origin_trans, axes_local, tool_trans):
    origins, axes, _, pos, rot = _frames(q, origin_rots, origin_trans, axes_local)
    n = q.shape[0]
    ee = pos + _mat3_vec(rot, tool_trans)
    jac = np.empty((6, n))
    for i in range(n):
        rx = ee[0] - origins[i, 0]
        ry = ee[1] - origins[i, 1]
        rz = ee[2] - origins[i, 2]
        zx, zy, zz = axes[i, 0], axes[i, 1], axes[i, 2]
        jac[0, i] = zy * rz - zz * ry
        jac[1, i] = zz * rx - zx * rz
        jac[2, i] = zx * ry - zy * rx
        jac[3, i] = zx
        jac[4, i] = zy
        jac[5, i] = zz
    return jac


@njit(cache=True)
def _jacobian_and_inertia(
    q, origin_rots, origin_trans, axes_local, tool_trans, masses, coms, rot_inertias
):
    origins, axes, rots, pos, rot = _frames(q, origin_rots, origin_trans, axes_local)
    n = q.shape[0]
    ee = pos + _mat3_vec(rot, tool_trans)
    jac = np.empty((6, n))
    for i in range(n):
        rx = ee[0] - origins[i, 0]
        ry = ee[1] - origins[i, 1]
        rz = ee[2] - origins[i, 2]
        zx, zy, zz = axes[i, 0], axes[i, 1], axes[i, 2]
        jac[0, i] = zy * rz - zz * ry
        jac[1, i] = zz * rx - zx * rz
        jac[2, i] = zx * ry - zy * rx
        jac[3, i] = zx
        jac[4, i] = zy
        jac[5, i] = zz

    # Spatial inertia of every link at the base origin, then suffix-summed
    # composites and H_ij = S_i^T I^c_max(i,j) S_j (composite rigid body
    # algorithm in a single common frame).
    spatial = np.zeros((n, 6, 6))
    for i in range(n):
        m = masses[i]
        r = rots[i]
        c = _mat3_vec(r, coms[i]) + origins[i]
        inertia_base = _mat3_mul(_mat3_mul(r, rot_inertias[i]), r.T)
        cx, cy, cz = c[0], c[1], c[2]
        spatial[i, 0, 0] = m
        spatial[i, 1, 1] = m
        spatial[i, 2, 2] = m
        # -m * skew(c)
        spatial[i, 0, 4] = m * cz
        spatial[i, 0, 5] = -m * cy
        spatial[i, 1, 3] = -m * cz
        spatial[i, 1, 5] = m * cx
        spatial[i, 2, 3] = m * cy
        spatial[i, 2, 4] = -m * cx
        for a in range(3):
            for b in range(3):
                spatial[i, 3 + a, b] = -spatial[i, a, 3 + b]
        c2 = cx * cx + cy * cy + cz * cz
        for a in range(3):
            for b in range(3):
                ct = c[a] * c[b]
                spatial[i, 3 + a, 3 + b] = inertia_base[a, b] - m * ct
            spatial[i, 3 + a, 3 + a] += m * c2

    for i in range(n - 2, -1, -1):
        spatial[i] += spatial[i + 1]

    subspaces = np.empty((n, 6))
    for i in range(n):
        zx, zy, zz = axes[i, 0], axes[i, 1], axes[i, 2]
        px, py, pz = origins[i, 0], origins[i, 1], origins[i, 2]
        subspaces[i, 0] = -(zy * pz - zz * py)
        subspaces[i, 1] = -(zz * px - zx * pz)
        subspaces[i, 2] = -(zx * py - zy * px)
        subspaces[i, 3] = zx
        subspaces[i, 4] = zy
        subspaces[i, 5] = zz

    inertia = np.empty((n, n))
    force = np.empty(6)
    for j in range(n):
        for a in range(6):
            s = 0.0
            for b in range(6):
                s += spatial[j, a, b] * subspaces[j, b]
            force[a] = s
        for i in range(j + 1):
            s = 0.0
            for a in range(6):
                s += subspaces[i, a] * force[a]
            inertia[i, j] = s
            inertia[j, i] = s
    return jac, inertia


@njit(cache=True)
def _qdd_ji(jac, wrench):
    return np.linalg.solve(jac, wrench)


@njit(cache=True)
def _qdd_jt(jac, wrench):
    return jac.T @ wrench


@njit(cache=True)
def _qdd_dls(jac, wrench, alpha):
    # Least-squares solve of the stacked damped system via QR, matching the
    # reference dls_matrix route.
    m, n = jac.shape
    stacked = np.zeros((m + n, n))
    stacked[:m] = jac
    for i in range(n):
        stacked[m + i, i] = alpha
    q, r = np.linalg.qr(stacked)
    rhs = np.empty(n)
    for i in range(n):
        s = 0.0
        for k in range(m):
            s += q[k, i] * wrench[k]
        rhs[i] = s
    x = np.empty(n)
    for i in range(n - 1, -1, -1):
        s = rhs[i]
        for k in range(i + 1, n):
            s -= r[i, k] * x[k]
        x[i] = s / r[i, i]
    return x


@njit(cache=True)
def _spd_solve(a, b):
    """Cholesky solve a x = b for symmetric positive definite a."""
    n = a.shape[0]
    chol = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            s = a[i, j]
            for k in range(j):
                s -= chol[i, k] * chol[j, k]
            if i == j:
                chol[i, i] = np.sqrt(s)
            else:
                chol[i, j] = s / chol[j, j]
    y = np.empty(n)
    for i in range(n):
        s = b[i]
        for k in range(i):
            s -= chol[i, k] * y[k]
        y[i] = s / chol[i, i]
    x = np.empty(n)
    for i in range(n - 1, -1, -1):
        s = y[i]
        for k in range(i + 1, n):
            s -= chol[k, i] * x[k]
        x[i] = s / chol[i, i]
    return x


@njit(cache=True)
def _qdd_fd(jac, inertia, wrench):
    return _spd_solve(inertia, jac.T @ wrench)


@njit(cache=True)
def _qdd_sdls(jac, wrench, limit):
    m, n = jac.shape
    u, sigmas, vt = np.linalg.svd(jac)
    joint_gains = np.empty(n)
    for j in range(n):
        acc = 0.0
        for i in range(m):
            acc += jac[i, j] * jac[i, j]
        joint_gains[j] = np.sqrt(acc)

    step = np.zeros(n)
    for i in range(sigmas.shape[0]):
        if sigmas[i] <= 1e-12 * sigmas[0]:
            continue
        component = 0.0
        for k in range(m):
            component += u[k, i] * wrench[k]
        m_i = 0.0
        for j in range(n):
            m_i += np.abs(vt[i, j]) * joint_gains[j]
        m_i /= sigmas[i]
        bound_i = limit if m_i <= 1.0 else limit / m_i
        scale = component / sigmas[i]
        worst = 0.0
        for j in range(n):
            mag = np.abs(scale * vt[i, j])
            if mag > worst:
                worst = mag
        if worst > bound_i:
            scale *= bound_i / worst
        for j in range(n):
            step[j] += scale * vt[i, j]
    worst = 0.0
    for j in range(n):
        if np.abs(step[j]) > worst:
            worst = np.abs(step[j])
    if worst > limit:
        step *= limit / worst
    return step


def jacobian(data: ChainData, q: np.ndarray) -> np.ndarray:
    return _jacobian(q, data.origin_rots, data.origin_trans, data.axes, data.tool_trans)


def jacobian_and_inertia(data: ChainData, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return _jacobian_and_inertia(
        q,
        data.origin_rots,
        data.origin_trans,
        data.axes,
        data.tool_trans,
        data.masses,
        data.coms,
        data.rot_inertias,
    )


def qdd_ji(data: ChainData, q: np.ndarray, wrench: np.ndarray) -> np.ndarray:
    return _qdd_ji(jacobian(data, q), wrench)


def qdd_jt(data: ChainData, q: np.ndarray, wrench: np.ndarray) -> np.ndarray:
    return _qdd_jt(jacobian(data, q), wrench)


def qdd_dls(data: ChainData, q: np.ndarray, wrench: np.ndarray, alpha: float) -> np.ndarray:
    return _qdd_dls(jacobian(data, q), wrench, alpha)


def qdd_sdls(data: ChainData, q: np.ndarray, wrench: np.ndarray, limit: float) -> np.ndarray:
    return _qdd_sdls(jacobian(data, q), wrench, limit)


def qdd_fd(data: ChainData, q: np.ndarray, wrench: np.ndarray) -> np.ndarray:
    jac, inertia = jacobian_and_inertia(data, q)
    return _qdd_fd(jac, inertia, wrench)


def warmup(data: ChainData) -> None:
    """Trigger JIT compilation of every kernel."""
    q = np.zeros(data.axes.shape[0])
    wrench = np.ones(6)
    qdd_ji(data, q + 0.1, wrench)
    qdd_jt(data, q, wrench)
    qdd_dls(data, q, wrench, 0.1)
    qdd_sdls(data, q, wrench, 0.1)
    qdd_fd(data, q, wrench)
