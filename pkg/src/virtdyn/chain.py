"""Serial-chain description: joint geometry, link inertia, the UR10 preset and
mass-ratio conditioned virtual models."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .transforms import Transform, rotation_to_rpy, rotation_x

_ORTHONORMAL_TOL = 1e-12


def _readonly(a, shape) -> np.ndarray:
    out = np.array(a, dtype=float).reshape(shape)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class JointDescriptor:
    """One revolute joint: a fixed transform from the parent link frame to the
    joint frame plus the rotation axis expressed in the joint frame."""

    origin: Transform
    axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    def __post_init__(self):
        object.__setattr__(self, "axis", _readonly(self.axis, (3,)))
        if abs(np.linalg.norm(self.axis) - 1.0) > _ORTHONORMAL_TOL:
            raise ValueError("joint axis must be a unit vector")
        r = self.origin.rotation
        if not np.allclose(r.T @ r, np.eye(3), atol=_ORTHONORMAL_TOL):
            raise ValueError("joint origin rotation must be orthonormal")


@dataclass(frozen=True)
class LinkInertia:
    """Mass distribution of one link: mass, center of mass in the link frame,
    rotational inertia about the center of mass."""

    mass: float
    com: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rot_inertia: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        object.__setattr__(self, "com", _readonly(self.com, (3,)))
        object.__setattr__(self, "rot_inertia", _readonly(self.rot_inertia, (3, 3)))
        if not self.mass > 0.0:
            raise ValueError("link mass must be positive")
        if not np.allclose(self.rot_inertia, self.rot_inertia.T, atol=_ORTHONORMAL_TOL):
            raise ValueError("rotational inertia must be symmetric")
        if np.linalg.eigvalsh(self.rot_inertia)[0] <= 0.0:
            raise ValueError("rotational inertia must be positive definite")


@dataclass(frozen=True)
class KinematicChain:
    """Serial chain of revolute joints; link i is rigidly attached to the frame
    moved by joint i, the tool transform locates the end-effector frame on the
    last link."""

    joints: tuple[JointDescriptor, ...]
    links: tuple[LinkInertia, ...]
    tool: Transform = field(default_factory=Transform.identity)

    def __post_init__(self):
        object.__setattr__(self, "joints", tuple(self.joints))
        object.__setattr__(self, "links", tuple(self.links))
        if len(self.joints) != len(self.links):
            raise ValueError("need exactly one link per joint")
        if len(self.joints) < 1:
            raise ValueError("chain needs at least one joint")

    @property
    def n(self) -> int:
        return len(self.joints)


@dataclass(frozen=True)
class VirtualModelParams:
    """End-effector dominated mass distribution: the last link carries mass
    ``m_e`` and isotropic rotational inertia ``ip_e``; every other link gets
    ``m_e / gamma`` and ``ip_e / gamma``."""

    gamma: float
    m_e: float = 1.0
    ip_e: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise ValueError("gamma must be positive")
        if not self.m_e > 0.0:
            raise ValueError("m_e must be positive")
        if not self.ip_e > 0.0:
            raise ValueError("ip_e must be positive")

    @property
    def m_l(self) -> float:
        return self.m_e / self.gamma

    @property
    def ip_l(self) -> float:
        return self.ip_e / self.gamma


# Standard UR10 parameters (classic DH): d, a, alpha per joint.  The joint
# rotation happens about z before the fixed tail Tz(d) Tx(a) Rx(alpha), so the
# tail of joint i becomes the origin transform of joint i+1 and the last tail
# becomes the tool transform.
_UR10_D = (0.1273, 0.0, 0.0, 0.163941, 0.1157, 0.0922)
_UR10_A = (0.0, -0.612, -0.5723, 0.0, 0.0, 0.0)
_UR10_ALPHA = (np.pi / 2, 0.0, 0.0, np.pi / 2, -np.pi / 2, 0.0)


def _dh_tail(d: float, a: float, alpha: float) -> Transform:
    return Transform(rotation_x(alpha), np.array([a, 0.0, d]))


def ur10_chain() -> KinematicChain:
    """UR10 preset.

    Link masses and inertias are valid placeholders (1 kg, unit inertia);
    every use in the experiments replaces them via :func:`build_virtual_chain`.
    """
    tails = [_dh_tail(d, a, al) for d, a, al in zip(_UR10_D, _UR10_A, _UR10_ALPHA)]
    origins = [Transform.identity()] + tails[:-1]
    joints = tuple(JointDescriptor(origin=o) for o in origins)
    links = tuple(LinkInertia(mass=1.0) for _ in range(6))
    return KinematicChain(joints=joints, links=links, tool=tails[-1])


def build_virtual_chain(base: KinematicChain, params: VirtualModelParams) -> KinematicChain:
    """Same geometry as ``base``, mass distribution from ``params``.

    Centers of mass sit at the link-frame origins and every rotational inertia
    is isotropic, so the inertia matrix depends on the configuration only
    through the chain geometry.
    """
    links = []
    for i in range(base.n):
        last = i == base.n - 1
        mass = params.m_e if last else params.m_l
        ip = params.ip_e if last else params.ip_l
        links.append(LinkInertia(mass=mass, com=np.zeros(3), rot_inertia=ip * np.eye(3)))
    return KinematicChain(joints=base.joints, links=tuple(links), tool=base.tool)


# --- JSON form -------------------------------------------------------------
#
# {"joints": [{"xyz": [..3], "rpy": [..3], "axis": [..3]}, ...],
#  "links":  [{"mass": m, "com": [..3], "inertia": [[..3]x3]}, ...],
#  "tool":   {"xyz": [..3], "rpy": [..3]}}


def chain_to_dict(chain: KinematicChain) -> dict:
    joints = []
    for j in chain.joints:
        joints.append(
            {
                "xyz": j.origin.translation.tolist(),
                "rpy": list(rotation_to_rpy(j.origin.rotation)),
                "axis": j.axis.tolist(),
            }
        )
    links = [
        {"mass": l.mass, "com": l.com.tolist(), "inertia": l.rot_inertia.tolist()}
        for l in chain.links
    ]
    tool = {
        "xyz": chain.tool.translation.tolist(),
        "rpy": list(rotation_to_rpy(chain.tool.rotation)),
    }
    return {"joints": joints, "links": links, "tool": tool}


def chain_from_dict(data: dict) -> KinematicChain:
    joints = tuple(
        JointDescriptor(
            origin=Transform.from_xyz_rpy(j["xyz"], j["rpy"]),
            axis=np.asarray(j["axis"], dtype=float),
        )
        for j in data["joints"]
    )
    links = tuple(
        LinkInertia(
            mass=float(l["mass"]),
            com=np.asarray(l["com"], dtype=float),
            rot_inertia=np.asarray(l["inertia"], dtype=float),
        )
        for l in data["links"]
    )
    tool = Transform.from_xyz_rpy(data["tool"]["xyz"], data["tool"]["rpy"])
    return KinematicChain(joints=joints, links=links, tool=tool)


def save_chain(chain: KinematicChain, path: str | Path) -> None:
    Path(path).write_text(json.dumps(chain_to_dict(chain), indent=2))


def load_chain(path: str | Path) -> KinematicChain:
    return chain_from_dict(json.loads(Path(path).read_text()))
