"""Rigid-body dynamics of serial manipulators described with standard DH.

Every function accepts a single configuration (``q`` of shape ``(n,)``) or a
batch with arbitrary leading dimensions (``(..., n)``); outputs carry the same
leading dimensions.

Conventions
-----------
* Frame ``i`` is attached to link ``i``; joint ``i`` moves about/along the
  ``z`` axis of frame ``i-1``.
* ``LinkSpec.com`` and ``LinkSpec.inertia`` are expressed in frame ``i``; the
  inertia tensor is taken about the center of mass.
* The dynamics parameter vector uses the barycentric layout
  ``(m, m*cx, m*cy, m*cz, Ixx, Ixy, Ixz, Iyy, Iyz, Izz)`` per link, with the
  inertia taken about the link frame origin.  In this layout the torques are
  exactly linear in the parameters.
* Gravity enters through ``U = -sum_j m_j g0^T c_j`` and ``g(q) = dU/dq``,
  so ``tau = B qdd + C qd + g`` is the torque the actuators must supply.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, ModelValidationError

__all__ = [
    "JointType",
    "LinkSpec",
    "ActuatorSpec",
    "RobotModel",
    "JointState",
    "N_LINK_PARAMS",
    "forward_kinematics",
    "com_positions_and_jacobians",
    "inertia_matrix",
    "coriolis_matrix",
    "gravity_vector",
    "potential_energy",
    "kinetic_energy",
    "inverse_dynamics",
    "regressor",
    "pack_parameters",
    "unpack_parameters",
    "fisherian_identify",
    "load_robot",
    "save_robot",
    "builtin_robot",
    "robot_from_dict",
    "robot_to_dict",
    "random_robot",
    "parse_joint_types",
    "actuator_torques",
]

N_LINK_PARAMS = 10
CORIOLIS_FD_STEP = 1e-6


class JointType(str, enum.Enum):
    REVOLUTE = "revolute"
    PRISMATIC = "prismatic"

    @classmethod
    def parse(cls, value) -> "JointType":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        if key in ("r", "revolute"):
            return cls.REVOLUTE
        if key in ("p", "prismatic"):
            return cls.PRISMATIC
        raise InvalidInputError(f"unknown joint type {value!r}")

    @property
    def letter(self) -> str:
        return "R" if self is JointType.REVOLUTE else "P"


def parse_joint_types(joint_types) -> tuple:
    """Normalize ``"RRPR"``, ``["R", "prismatic"]`` etc. to JointType tuples."""
    if isinstance(joint_types, str):
        joint_types = list(joint_types)
    return tuple(JointType.parse(t) for t in joint_types)


def _inertia_matrix_from6(v) -> np.ndarray:
    xx, xy, xz, yy, yz, zz = v
    return np.array([[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]], dtype=float)


@dataclass(frozen=True)
class LinkSpec:
    """One link of a serial chain.

    ``dh_d_offset`` is the full ``d`` of a revolute joint and the constant part
    of ``d`` for a prismatic one; ``dh_theta_offset`` mirrors that.
    ``inertia`` holds ``(xx, xy, xz, yy, yz, zz)`` about the center of mass.
    """

    joint_type: JointType
    dh_a: float = 0.0
    dh_alpha: float = 0.0
    dh_d_offset: float = 0.0
    dh_theta_offset: float = 0.0
    mass: float = 0.0
    com: tuple = (0.0, 0.0, 0.0)
    inertia: tuple = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "joint_type", JointType.parse(self.joint_type))
        object.__setattr__(self, "com", tuple(float(c) for c in self.com))
        object.__setattr__(self, "inertia", tuple(float(c) for c in self.inertia))
        if len(self.com) != 3 or len(self.inertia) != 6:
            raise InvalidInputError("com needs 3 entries and inertia 6")

    @property
    def is_revolute(self) -> bool:
        return self.joint_type is JointType.REVOLUTE

    @property
    def inertia_tensor(self) -> np.ndarray:
        return _inertia_matrix_from6(self.inertia)

    def validate(self):
        vals = np.array(
            [self.dh_a, self.dh_alpha, self.dh_d_offset, self.dh_theta_offset, self.mass]
            + list(self.com) + list(self.inertia)
        )
        if not np.all(np.isfinite(vals)):
            raise ModelValidationError("link parameters must be finite")
        if self.mass < 0:
            raise ModelValidationError(f"negative mass {self.mass}")
        tensor = self.inertia_tensor
        eig = np.linalg.eigvalsh(tensor)
        if eig.min() < -1e-12 * max(np.trace(tensor), 1.0):
            raise ModelValidationError(f"inertia tensor not PSD (eigenvalues {eig})")


@dataclass(frozen=True)
class ActuatorSpec:
    rotor_inertia_reflected: float = 0.0
    viscous_friction: float = 0.0
    coulomb_friction: float = 0.0
    torque_gain: float = 1.0


@dataclass(frozen=True)
class RobotModel:
    links: tuple
    gravity: tuple = (0.0, 0.0, -9.81)
    actuator: tuple | None = None
    name: str = "robot"

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "gravity", tuple(float(g) for g in self.gravity))
        if self.actuator is not None:
            object.__setattr__(self, "actuator", tuple(self.actuator))
        if len(self.links) < 1:
            raise ModelValidationError("a robot needs at least one link")
        if len(self.gravity) != 3:
            raise ModelValidationError("gravity must be a 3-vector")
        if self.actuator is not None and len(self.actuator) != len(self.links):
            raise ModelValidationError("one actuator entry per joint is required")

    @property
    def n(self) -> int:
        return len(self.links)

    @property
    def joint_types(self) -> tuple:
        return tuple(link.joint_type for link in self.links)

    @property
    def revolute_mask(self) -> np.ndarray:
        return np.array([link.is_revolute for link in self.links])

    @property
    def revolute_indices(self) -> np.ndarray:
        return np.flatnonzero(self.revolute_mask)

    @property
    def prismatic_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.revolute_mask)

    @property
    def n_params(self) -> int:
        return N_LINK_PARAMS * self.n

    def validate(self) -> "RobotModel":
        for link in self.links:
            link.validate()
        if not np.all(np.isfinite(self.gravity)):
            raise ModelValidationError("gravity must be finite")
        return self

    def with_links(self, links) -> "RobotModel":
        return replace(self, links=tuple(links))


@dataclass(frozen=True)
class JointState:
    """Positions, velocities and accelerations; arrays of shape ``(..., n)``."""

    q: np.ndarray
    dq: np.ndarray
    ddq: np.ndarray

    def __post_init__(self):
        arrs = [np.asarray(a, dtype=float) for a in (self.q, self.dq, self.ddq)]
        if not (arrs[0].shape == arrs[1].shape == arrs[2].shape) or arrs[0].ndim == 0:
            raise InvalidInputError(
                f"q, dq, ddq shapes differ: {[a.shape for a in arrs]}"
            )
        if not all(np.all(np.isfinite(a)) for a in arrs):
            raise InvalidInputError("joint state contains non-finite entries")
        object.__setattr__(self, "q", arrs[0])
        object.__setattr__(self, "dq", arrs[1])
        object.__setattr__(self, "ddq", arrs[2])

    @property
    def n(self) -> int:
        return self.q.shape[-1]

    def __len__(self):
        return 1 if self.q.ndim == 1 else self.q.shape[0]

    def __getitem__(self, idx) -> "JointState":
        return JointState(self.q[idx], self.dq[idx], self.ddq[idx])

    def as_array(self) -> np.ndarray:
        """Concatenate to ``(..., 3n)`` in the order q, dq, ddq."""
        return np.concatenate([self.q, self.dq, self.ddq], axis=-1)

    @classmethod
    def from_array(cls, x, n: int) -> "JointState":
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != 3 * n:
            raise InvalidInputError(f"expected last dimension {3 * n}, got {x.shape[-1]}")
        return cls(x[..., :n], x[..., n:2 * n], x[..., 2 * n:])


# ---------------------------------------------------------------------------
# kinematics


def _check_q(model: RobotModel, q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.ndim == 0 or q.shape[-1] != model.n:
        raise InvalidInputError(f"expected {model.n} joint coordinates, got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise InvalidInputError("joint coordinates must be finite")
    return q


def _skew(v: np.ndarray) -> np.ndarray:
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def _frames(model: RobotModel, q: np.ndarray):
    """Absolute rotations and origins of frames 0..n, shapes (..., n+1, 3, 3/..)."""
    batch = q.shape[:-1]
    rot = np.empty(batch + (model.n + 1, 3, 3))
    org = np.empty(batch + (model.n + 1, 3))
    rot[..., 0, :, :] = np.eye(3)
    org[..., 0, :] = 0.0
    for i, link in enumerate(model.links):
        if link.is_revolute:
            theta = link.dh_theta_offset + q[..., i]
            d = np.full(batch, link.dh_d_offset)
        else:
            theta = np.full(batch, link.dh_theta_offset)
            d = link.dh_d_offset + q[..., i]
        ct, st = np.cos(theta), np.sin(theta)
        ca, sa = np.cos(link.dh_alpha), np.sin(link.dh_alpha)
        local = np.empty(batch + (3, 3))
        local[..., 0, 0] = ct
        local[..., 0, 1] = -st * ca
        local[..., 0, 2] = st * sa
        local[..., 1, 0] = st
        local[..., 1, 1] = ct * ca
        local[..., 1, 2] = -ct * sa
        local[..., 2, 0] = 0.0
        local[..., 2, 1] = sa
        local[..., 2, 2] = ca
        offset = np.stack([link.dh_a * ct, link.dh_a * st, d], axis=-1)
        prev = rot[..., i, :, :]
        rot[..., i + 1, :, :] = prev @ local
        org[..., i + 1, :] = org[..., i, :] + np.einsum("...ij,...j->...i", prev, offset)
    return rot, org


def forward_kinematics(model: RobotModel, q):
    """Poses of frames ``1..n`` as a list of ``(R, p)`` pairs."""
    q = _check_q(model, q)
    rot, org = _frames(model, q)
    return [(rot[..., i, :, :], org[..., i, :]) for i in range(1, model.n + 1)]


def _com_and_jacobians(model: RobotModel, rot, org):
    n = model.n
    batch = rot.shape[:-3]
    com_local = np.array([link.com for link in model.links])
    com = org[..., 1:, :] + np.einsum("...kij,kj->...ki", rot[..., 1:, :, :], com_local)
    z = rot[..., :-1, :, 2]  # axis of joint j is z of frame j-1
    jl = np.zeros(batch + (n, 3, n))
    jw = np.zeros(batch + (n, 3, n))
    for j, link in enumerate(model.links):
        zj = z[..., j, :]
        if link.is_revolute:
            lever = com[..., j:, :] - org[..., None, j, :]
            jl[..., j:, :, j] = np.cross(zj[..., None, :], lever)
            jw[..., j:, :, j] = zj[..., None, :]
        else:
            jl[..., j:, :, j] = zj[..., None, :]
    return com, jl, jw


def com_positions_and_jacobians(model: RobotModel, q):
    """Center-of-mass positions and Jacobians of every link.

    Returns
    -------
    com : ndarray, shape (..., n, 3)
    jac_linear : ndarray, shape (..., n, 3, n)
        ``d com_i / dt = jac_linear[i] @ qd``.
    jac_angular : ndarray, shape (..., n, 3, n)
        ``omega_i = jac_angular[i] @ qd``.
    """
    q = _check_q(model, q)
    rot, org = _frames(model, q)
    return _com_and_jacobians(model, rot, org)


def _link_arrays(model: RobotModel):
    mass = np.array([link.mass for link in model.links])
    inertia = np.array([link.inertia_tensor for link in model.links])
    return mass, inertia


def _inertia_matrix(model: RobotModel, q: np.ndarray) -> np.ndarray:
    rot, org = _frames(model, q)
    _, jl, jw = _com_and_jacobians(model, rot, org)
    mass, inertia = _link_arrays(model)
    world_inertia = rot[..., 1:, :, :] @ inertia @ np.swapaxes(rot[..., 1:, :, :], -1, -2)
    b = np.einsum("k,...kai,...kaj->...ij", mass, jl, jl)
    b += np.einsum("...kai,...kab,...kbj->...ij", jw, world_inertia, jw)
    return 0.5 * (b + np.swapaxes(b, -1, -2))


def inertia_matrix(model: RobotModel, q) -> np.ndarray:
    """Joint-space inertia matrix ``B(q)``, shape ``(..., n, n)``."""
    q = _check_q(model, q)
    model.validate()
    return _inertia_matrix(model, q)


def _inertia_derivatives(model: RobotModel, q: np.ndarray, step: float) -> np.ndarray:
    """Central differences ``dB/dq_k`` stacked on axis -3: shape (..., n, n, n)."""
    n = model.n
    shifts = step * np.eye(n)
    qp = q[..., None, :] + shifts
    qm = q[..., None, :] - shifts
    return (_inertia_matrix(model, qp) - _inertia_matrix(model, qm)) / (2.0 * step)


def coriolis_matrix(model: RobotModel, q, dq, step: float = CORIOLIS_FD_STEP) -> np.ndarray:
    """Coriolis/centrifugal matrix from Christoffel symbols of the first kind.

    ``C_ij = 1/2 sum_k (dB_ij/dq_k + dB_ik/dq_j - dB_jk/dq_i) qd_k`` with the
    partial derivatives of ``B`` taken by central differences.
    """
    q = _check_q(model, q)
    dq = np.asarray(dq, dtype=float)
    if dq.shape != q.shape:
        raise InvalidInputError("q and dq must have the same shape")
    model.validate()
    db = _inertia_derivatives(model, q, step)  # [..., k, i, j]
    c = np.einsum("...kij,...k->...ij", db, dq)
    c += np.einsum("...jik,...k->...ij", db, dq)
    c -= np.einsum("...ijk,...k->...ij", db, dq)
    return 0.5 * c


def potential_energy(model: RobotModel, q) -> np.ndarray:
    q = _check_q(model, q)
    rot, org = _frames(model, q)
    com, _, _ = _com_and_jacobians(model, rot, org)
    mass, _ = _link_arrays(model)
    g0 = np.asarray(model.gravity)
    return -np.einsum("k,...ka,a->...", mass, com, g0)


def kinetic_energy(model: RobotModel, q, dq) -> np.ndarray:
    b = inertia_matrix(model, q)
    dq = np.asarray(dq, dtype=float)
    return 0.5 * np.einsum("...i,...ij,...j->...", dq, b, dq)


def gravity_vector(model: RobotModel, q) -> np.ndarray:
    """Gravity torques ``dU/dq`` with ``U = -sum_j m_j g0^T c_j``."""
    q = _check_q(model, q)
    model.validate()
    rot, org = _frames(model, q)
    _, jl, _ = _com_and_jacobians(model, rot, org)
    mass, _ = _link_arrays(model)
    g0 = np.asarray(model.gravity)
    return -np.einsum("k,...kai,a->...i", mass, jl, g0)


def _check_state(model: RobotModel, state: JointState) -> JointState:
    if not isinstance(state, JointState):
        raise InvalidInputError("expected a JointState")
    if state.n != model.n:
        raise InvalidInputError(f"state has {state.n} joints, model has {model.n}")
    return state


def actuator_torques(model: RobotModel, state: JointState) -> np.ndarray:
    """Reflected rotor inertia and friction: ``Kr^2 Bm qdd + Fv qd + Fc sign(qd)``."""
    if model.actuator is None:
        return np.zeros_like(state.q)
    rotor = np.array([a.rotor_inertia_reflected for a in model.actuator])
    fv = np.array([a.viscous_friction for a in model.actuator])
    fc = np.array([a.coulomb_friction for a in model.actuator])
    return rotor * state.ddq + fv * state.dq + fc * np.sign(state.dq)


def inverse_dynamics(model: RobotModel, state: JointState, with_actuator: bool = False) -> np.ndarray:
    """``tau = B(q) qdd + C(q, qd) qd + g(q)``, plus actuator terms if requested."""
    state = _check_state(model, state)
    b = inertia_matrix(model, state.q)
    c = coriolis_matrix(model, state.q, state.dq)
    tau = (
        np.einsum("...ij,...j->...i", b, state.ddq)
        + np.einsum("...ij,...j->...i", c, state.dq)
        + gravity_vector(model, state.q)
    )
    if with_actuator:
        tau = tau + actuator_torques(model, state)
    return tau


# ---------------------------------------------------------------------------
# linear-in-parameters form


def pack_parameters(model: RobotModel) -> np.ndarray:
    """Barycentric dynamics parameters, length ``10 n``."""
    w = np.empty(model.n_params)
    for i, link in enumerate(model.links):
        m = link.mass
        c = np.asarray(link.com)
        origin_inertia = link.inertia_tensor + m * (c @ c * np.eye(3) - np.outer(c, c))
        block = w[N_LINK_PARAMS * i:N_LINK_PARAMS * (i + 1)]
        block[0] = m
        block[1:4] = m * c
        block[4:] = origin_inertia[[0, 0, 0, 1, 1, 2], [0, 1, 2, 1, 2, 2]]
    return w


def unpack_parameters(model: RobotModel, w) -> RobotModel:
    """Inverse of :func:`pack_parameters`; kinematics are taken from ``model``.

    A link with zero mass gets its first moment discarded.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (model.n_params,):
        raise InvalidInputError(f"expected {model.n_params} parameters, got {w.shape}")
    links = []
    for i, link in enumerate(model.links):
        block = w[N_LINK_PARAMS * i:N_LINK_PARAMS * (i + 1)]
        m = block[0]
        c = block[1:4] / m if m > 0 else np.zeros(3)
        origin_inertia = _inertia_matrix_from6(block[4:])
        com_inertia = origin_inertia - m * (c @ c * np.eye(3) - np.outer(c, c))
        links.append(
            replace(
                link,
                mass=float(m),
                com=tuple(c),
                inertia=tuple(com_inertia[[0, 0, 0, 1, 1, 2], [0, 1, 2, 1, 2, 2]]),
            )
        )
    return model.with_links(links)


def _inertia_lift(v: np.ndarray) -> np.ndarray:
    """``L(v)`` such that ``I v = L(v) @ (xx, xy, xz, yy, yz, zz)``."""
    out = np.zeros(v.shape[:-1] + (3, 6))
    out[..., 0, 0] = v[..., 0]
    out[..., 0, 1] = v[..., 1]
    out[..., 0, 2] = v[..., 2]
    out[..., 1, 1] = v[..., 0]
    out[..., 1, 3] = v[..., 1]
    out[..., 1, 4] = v[..., 2]
    out[..., 2, 2] = v[..., 0]
    out[..., 2, 4] = v[..., 1]
    out[..., 2, 5] = v[..., 2]
    return out


def regressor(model: RobotModel, state: JointState) -> np.ndarray:
    """Regressor ``Phi`` with ``tau = Phi @ pack_parameters(model)``.

    Built from the recursive Newton-Euler equations written about each link
    frame origin, which are linear in the barycentric parameters.  Only the
    kinematic part of ``model`` is used.

    Returns
    -------
    ndarray, shape (..., n, 10 n)
    """
    state = _check_state(model, state)
    q, dq, ddq = state.q, state.dq, state.ddq
    n = model.n
    batch = q.shape[:-1]
    rot, org = _frames(model, q)

    omega = np.zeros(batch + (3,))
    domega = np.zeros(batch + (3,))
    acc = np.broadcast_to(-np.asarray(model.gravity), batch + (3,)).copy()
    force_blocks = []
    moment_blocks = []
    for i, link in enumerate(model.links):
        z = rot[..., i, :, 2]
        r = org[..., i + 1, :] - org[..., i, :]
        qd = dq[..., i, None]
        qdd = ddq[..., i, None]
        if link.is_revolute:
            domega = domega + z * qdd + np.cross(omega, z * qd)
            omega = omega + z * qd
            acc = acc + np.cross(domega, r) + np.cross(omega, np.cross(omega, r))
        else:
            acc = (
                acc + np.cross(domega, r) + np.cross(omega, np.cross(omega, r))
                + 2.0 * np.cross(omega, z * qd) + z * qdd
            )
        rot_i = rot[..., i + 1, :, :]
        rot_t = np.swapaxes(rot_i, -1, -2)
        s_w = _skew(omega)
        f_blk = np.zeros(batch + (3, N_LINK_PARAMS))
        f_blk[..., :, 0] = acc
        f_blk[..., :, 1:4] = (_skew(domega) + s_w @ s_w) @ rot_i
        m_blk = np.zeros(batch + (3, N_LINK_PARAMS))
        m_blk[..., :, 1:4] = -_skew(acc) @ rot_i
        lift_dw = _inertia_lift(np.einsum("...ij,...j->...i", rot_t, domega))
        lift_w = _inertia_lift(np.einsum("...ij,...j->...i", rot_t, omega))
        m_blk[..., :, 4:] = rot_i @ lift_dw + s_w @ rot_i @ lift_w
        force_blocks.append(f_blk)
        moment_blocks.append(m_blk)

    phi = np.zeros(batch + (n, model.n_params))
    for j, link in enumerate(model.links):
        z = rot[..., j, :, 2]
        for i in range(j, n):
            cols = slice(N_LINK_PARAMS * i, N_LINK_PARAMS * (i + 1))
            if link.is_revolute:
                lever = org[..., i + 1, :] - org[..., j, :]
                wrench = moment_blocks[i] + _skew(lever) @ force_blocks[i]
            else:
                wrench = force_blocks[i]
            phi[..., j, cols] = np.einsum("...a,...ak->...k", z, wrench)
    return phi


def fisherian_identify(phi_stack, tau_stack, rcond: float | None = None) -> np.ndarray:
    """Least-squares dynamics parameters from a stacked regressor.

    Rank deficiency is the rule here (only base parameters are identifiable),
    so the minimum-norm solution is returned.
    """
    phi_stack = np.asarray(phi_stack, dtype=float)
    tau_stack = np.asarray(tau_stack, dtype=float)
    if phi_stack.ndim == 3:
        phi_stack = phi_stack.reshape(-1, phi_stack.shape[-1])
    tau_stack = tau_stack.reshape(-1)
    if phi_stack.size == 0 or tau_stack.size == 0:
        raise InvalidInputError("no data to identify from")
    if phi_stack.shape[0] != tau_stack.shape[0]:
        raise InvalidInputError(
            f"regressor has {phi_stack.shape[0]} rows, torques {tau_stack.shape[0]}"
        )
    w, *_ = np.linalg.lstsq(phi_stack, tau_stack, rcond=rcond)
    return w


# ---------------------------------------------------------------------------
# model files

_LINK_FIELDS = (
    "joint_type", "dh_a", "dh_alpha", "dh_d_offset", "dh_theta_offset", "mass", "com", "inertia",
)
_ACTUATOR_FIELDS = ("rotor_inertia_reflected", "viscous_friction", "coulomb_friction", "torque_gain")


def robot_from_dict(doc: dict) -> RobotModel:
    try:
        links = []
        for entry in doc["links"]:
            unknown = set(entry) - set(_LINK_FIELDS)
            if unknown:
                raise ModelValidationError(f"unknown link fields {sorted(unknown)}")
            links.append(LinkSpec(**entry))
        actuator = doc.get("actuator")
        if actuator is not None:
            actuator = tuple(
                ActuatorSpec(**{k: float(v) for k, v in a.items() if k in _ACTUATOR_FIELDS})
                for a in actuator
            )
        model = RobotModel(
            links=tuple(links),
            gravity=tuple(doc.get("gravity", (0.0, 0.0, -9.81))),
            actuator=actuator,
            name=doc.get("name", "robot"),
        )
    except (KeyError, TypeError) as exc:
        raise ModelValidationError(f"malformed robot description: {exc}") from exc
    return model.validate()


def robot_to_dict(model: RobotModel) -> dict:
    doc = {
        "name": model.name,
        "gravity": list(model.gravity),
        "links": [
            {
                "joint_type": link.joint_type.value,
                "dh_a": link.dh_a,
                "dh_alpha": link.dh_alpha,
                "dh_d_offset": link.dh_d_offset,
                "dh_theta_offset": link.dh_theta_offset,
                "mass": link.mass,
                "com": list(link.com),
                "inertia": list(link.inertia),
            }
            for link in model.links
        ],
    }
    if model.actuator is not None:
        doc["actuator"] = [
            {k: getattr(a, k) for k in _ACTUATOR_FIELDS} for a in model.actuator
        ]
    return doc


def load_robot(path) -> RobotModel:
    """Load a robot from a JSON file.

    A bare name such as ``scara`` or ``scara.json`` that does not exist on
    disk resolves to the shipped model of that name.
    """
    p = Path(path)
    if not p.exists() and p.suffix in ("", ".json") and p.parent == Path("."):
        return builtin_robot(p.stem)
    with open(p) as fh:
        return robot_from_dict(json.load(fh))


def save_robot(model: RobotModel, path):
    with open(path, "w") as fh:
        json.dump(robot_to_dict(model), fh, indent=2)


def builtin_robot(name: str) -> RobotModel:
    """One of the shipped models: ``scara``, ``rr``, ``rp``, ``pr``, ``pp``, ``pendulum``."""
    res = resources.files("gipkernel") / "robots" / f"{name}.json"
    if not res.is_file():
        raise InvalidInputError(f"no shipped robot named {name!r}")
    return robot_from_dict(json.loads(res.read_text()))


def random_robot(joint_types, rng=None, gravity=(0.0, 0.0, -9.81), name="random") -> RobotModel:
    """A physically valid serial chain with random DH and inertial parameters.

    Lengths are drawn from [0.1, 0.5] m, twists from [-pi, pi], masses from
    [1, 10] kg; inertia tensors are random rotations of positive principal
    moments that satisfy the triangle inequality.
    """
    rng = np.random.default_rng(rng)
    links = []
    for jt in parse_joint_types(joint_types):
        principal = rng.uniform(0.02, 0.2, size=3)
        principal[2] = rng.uniform(abs(principal[0] - principal[1]), principal[0] + principal[1])
        rot, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        tensor = rot @ np.diag(principal) @ rot.T
        links.append(
            LinkSpec(
                joint_type=jt,
                dh_a=rng.uniform(0.1, 0.5),
                dh_alpha=rng.uniform(-np.pi, np.pi),
                dh_d_offset=rng.uniform(0.1, 0.5) * rng.choice([-1, 1]),
                dh_theta_offset=rng.uniform(-np.pi, np.pi),
                mass=rng.uniform(1.0, 10.0),
                com=tuple(rng.uniform(-0.2, 0.2, size=3)),
                inertia=tuple(tensor[[0, 0, 0, 1, 1, 2], [0, 1, 2, 1, 2, 2]]),
            )
        )
    return RobotModel(links=tuple(links), gravity=gravity, name=name).validate()
