"""Serial-chain kinematics for a 7-DoF revolute manipulator.

Frames are composed as ``T_i = T_{i-1} * Trans(offset_i) * Rot(axis_i, q_i)``;
the tool frame adds a fixed translation after the last joint. The tool point
is the probe center ``x_ee`` used by the controllers.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

N_JOINTS = 7


class SingularJacobian(np.linalg.LinAlgError):
    """Raised by the undamped pseudoinverse when J J^T is numerically singular."""


def as_joint_vector(q) -> np.ndarray:
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.shape != (N_JOINTS,):
        raise ValueError(f"joint vector must have {N_JOINTS} entries, got {q.shape[0]}")
    if not np.all(np.isfinite(q)):
        raise ValueError("joint vector has non-finite entries")
    return q


def skew(v) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def axis_rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation about a unit axis."""
    K = skew(axis)
    s, c = np.sin(angle), np.cos(angle)
    return np.eye(3) + s * K + (1.0 - c) * (K @ K)


@dataclass(frozen=True)
class Joint:
    axis: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float).reshape(3)
        offset = np.asarray(self.offset, dtype=float).reshape(3)
        n = np.linalg.norm(axis)
        if n == 0 or not np.isfinite(n):
            raise ValueError("joint axis must be a non-zero finite vector")
        # tolerate sloppy input, but the stored axis is exactly unit
        object.__setattr__(self, "axis", axis / n)
        object.__setattr__(self, "offset", offset)


@dataclass(frozen=True)
class RobotModel:
    joints: tuple
    tool_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    approach_axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    def __post_init__(self):
        joints = tuple(j if isinstance(j, Joint) else Joint(*j) for j in self.joints)
        if len(joints) != N_JOINTS:
            raise ValueError(f"chain must have exactly {N_JOINTS} revolute joints, got {len(joints)}")
        approach = np.asarray(self.approach_axis, dtype=float).reshape(3)
        n = np.linalg.norm(approach)
        if n == 0:
            raise ValueError("tool approach axis must be non-zero")
        object.__setattr__(self, "joints", joints)
        object.__setattr__(self, "tool_offset", np.asarray(self.tool_offset, dtype=float).reshape(3))
        object.__setattr__(self, "approach_axis", approach / n)


# z/y alternating chain, 0.8 m shoulder height and ~1.1 m reach from the shoulder
DEFAULT_AXES = ((0, 0, 1), (0, 1, 0), (0, 0, 1), (0, 1, 0), (0, 0, 1), (0, 1, 0), (0, 0, 1))
DEFAULT_OFFSETS = ((0, 0, 0.4), (0, 0, 0.4), (0, 0, 0.3), (0, 0, 0.3), (0, 0, 0.4), (0, 0, 0.1), (0, 0, 0.0))
DEFAULT_TOOL_OFFSET = (0.0, 0.0, 0.0)
# side-mounted probe: the last two axes pass through the probe center, so the
# wrist can tilt the probe without moving it
DEFAULT_APPROACH_AXIS = (1.0, 0.0, 0.0)


def default_robot() -> RobotModel:
    return RobotModel(
        joints=tuple(Joint(a, o) for a, o in zip(DEFAULT_AXES, DEFAULT_OFFSETS)),
        tool_offset=np.array(DEFAULT_TOOL_OFFSET),
        approach_axis=np.array(DEFAULT_APPROACH_AXIS, dtype=float),
    )


@dataclass(frozen=True)
class Pose:
    position: np.ndarray
    orientation: np.ndarray
    approach: np.ndarray  # probe axis n_ee in world frame


@dataclass(frozen=True)
class JacobianPair:
    J_pos: np.ndarray  # 3x7, joint rates -> tool point velocity
    J_ang: np.ndarray  # 3x7, joint rates -> angular velocity


def _chain(model: RobotModel, q: np.ndarray):
    R = np.eye(3)
    p = np.zeros(3)
    origins = np.empty((N_JOINTS, 3))
    axes = np.empty((N_JOINTS, 3))
    for i, (joint, qi) in enumerate(zip(model.joints, q)):
        p = p + R @ joint.offset
        origins[i] = p
        axes[i] = R @ joint.axis
        R = R @ axis_rotation(joint.axis, qi)
    tip = p + R @ model.tool_offset
    return R, tip, origins, axes


def forward_kinematics(model: RobotModel, q) -> Pose:
    q = np.asarray(q, dtype=float)
    if np.any(np.abs(q) > 2 * np.pi):
        log.warning("joint angle beyond 2*pi: %s", q)
    R, tip, _, _ = _chain(model, q)
    return Pose(position=tip, orientation=R, approach=R @ model.approach_axis)


def jacobians(model: RobotModel, q) -> JacobianPair:
    _, tip, origins, axes = _chain(model, np.asarray(q, dtype=float))
    J_pos = np.cross(axes, tip - origins).T
    return JacobianPair(J_pos=J_pos, J_ang=axes.T.copy())


def pose_and_jacobians(model: RobotModel, q) -> tuple[Pose, JacobianPair]:
    """Both in one chain traversal; used inside the control loop."""
    R, tip, origins, axes = _chain(model, np.asarray(q, dtype=float))
    pose = Pose(position=tip, orientation=R, approach=R @ model.approach_axis)
    return pose, JacobianPair(J_pos=np.cross(axes, tip - origins).T, J_ang=axes.T.copy())


def damped_pinv(J: np.ndarray, lam: float = 1e-3) -> np.ndarray:
    """J^T (J J^T + lam^2 I)^-1.

    With ``lam == 0`` this is the Moore-Penrose right inverse and requires J to
    have full row rank.
    """
    J = np.asarray(J, dtype=float)
    if lam < 0:
        raise ValueError("damping must be non-negative")
    JJt = J @ J.T
    if lam == 0:
        if np.linalg.cond(JJt) > 1e12:
            raise SingularJacobian("J J^T is singular; use a positive damping factor")
    else:
        JJt = JJt + lam**2 * np.eye(J.shape[0])
    return np.linalg.solve(JJt, J).T


def nullspace_projector(J: np.ndarray, J_pinv: np.ndarray) -> np.ndarray:
    return np.eye(J.shape[1]) - J_pinv @ J


def resolved_rate_step(model: RobotModel, q, x_des, K_ee, rho=None, lam: float = 1e-3) -> np.ndarray:
    """Joint-rate command J^+ K_ee (x_des - x_ee) + (I - J^+ J) rho.

    ``K_ee`` may be a 3x3 diagonal matrix or its diagonal.
    """
    q = as_joint_vector(q)
    K = np.asarray(K_ee, dtype=float)
    if K.ndim == 1:
        K = np.diag(K)
    pose, jac = pose_and_jacobians(model, q)
    J = jac.J_pos
    J_pinv = damped_pinv(J, lam)
    qdot = J_pinv @ (K @ (np.asarray(x_des, dtype=float) - pose.position))
    if rho is not None:
        qdot = qdot + nullspace_projector(J, J_pinv) @ np.asarray(rho, dtype=float)
    return qdot


def solve_ik(
    model: RobotModel,
    position,
    approach=None,
    q_seed=None,
    lam: float = 1e-2,
    tol: float = 1e-10,
    max_iter: int = 500,
    max_step: float = 0.2,
) -> np.ndarray:
    """Damped least-squares IK for the tool point and, optionally, the probe axis.

    The axis task matches the unit probe axis only, so roll about it stays free.
    """
    q = np.zeros(N_JOINTS) if q_seed is None else as_joint_vector(q_seed).copy()
    position = np.asarray(position, dtype=float)
    target_axis = None if approach is None else np.asarray(approach, float) / np.linalg.norm(approach)
    for _ in range(max_iter):
        pose, jac = pose_and_jacobians(model, q)
        err = position - pose.position
        J = jac.J_pos
        if target_axis is not None:
            err = np.concatenate([err, target_axis - pose.approach])
            # d(n_ee)/dt = w x n_ee = -[n_ee]x w
            J = np.vstack([J, -skew(pose.approach) @ jac.J_ang])
        if err @ err < tol**2:
            return q
        step = J.T @ np.linalg.solve(J @ J.T + lam**2 * np.eye(J.shape[0]), err)
        norm = np.linalg.norm(step)
        if norm > max_step:
            step *= max_step / norm
        q = q + step
    raise RuntimeError(f"IK did not converge (residual {np.linalg.norm(err):.3g})")
